#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace hotspot {

/// Closed-form trip model: a drive that starts at a hotspot, covers d_in
/// inside the congestion zone at v_in, then d_out outside at v_out.
struct TripParams {
    double d_in_m = 2000.0;
    double d_out_m = 8000.0;
    double v_in_mps = 2.0;
    double v_out_mps = 12.5;
    double s_min_s = 1.0;
    double s_max_s = 120.0;
    double e_in_j = 0.4;
    double e_out_j = 7.0;

    bool valid() const {
        return d_in_m >= 0 && d_out_m >= 0 && v_in_mps > 0 && v_out_mps > 0 && s_min_s > 0 &&
               s_max_s >= s_min_s && e_in_j >= 0 && e_out_j >= 0;
    }
};

/// Samples taken inside the zone: d_in / (v_in * s_min), real-valued.
double n_in(const TripParams& p);

/// Interval growth ratio r = (d_in + v_out s_max) / (d_in + v_out s_min).
double interval_growth_ratio(const TripParams& p);

/// Closed-form count of samples outside the zone,
/// 1 + ceil(log_r(1 + d_out (r-1) / (v_out s_min))); uniform-sampling count
/// when s_max == s_min.
double n_out(const TripParams& p);

/// Total trip energy E = n_in * e_in + n_out * e_out.
double trip_energy_j(const TripParams& p);

/// Smallest-s_max feasible (s_min, s_max) pair within the energy budget,
/// preferring smaller s_min at equal s_max. Empty when nothing fits.
std::optional<std::pair<double, double>> select_params(double budget_j, TripParams fixed,
                                                       const std::vector<double>& s_min_grid,
                                                       const std::vector<double>& s_max_grid);

struct EnergyCurvePoint {
    double s_max_s = 0.0;
    double energy_j = 0.0;
};

/// trip_energy evaluated per s_max value (values assumed sorted ascending).
std::vector<EnergyCurvePoint> energy_curve(const TripParams& p,
                                           const std::vector<double>& s_max_values);

}  // namespace hotspot
