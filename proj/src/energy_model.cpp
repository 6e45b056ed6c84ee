#include "hotspot/energy_model.hpp"

#include <cmath>
#include <stdexcept>

namespace hotspot {

double n_in(const TripParams& p) {
    if (p.d_in_m == 0.0) return 0.0;
    return p.d_in_m / (p.v_in_mps * p.s_min_s);
}

double interval_growth_ratio(const TripParams& p) {
    return (p.d_in_m + p.v_out_mps * p.s_max_s) / (p.d_in_m + p.v_out_mps * p.s_min_s);
}

double n_out(const TripParams& p) {
    if (!p.valid()) throw std::invalid_argument("n_out: invalid trip parameters");
    if (p.d_out_m == 0.0) return 1.0;  // just the boundary sample
    if (p.s_max_s == p.s_min_s) return std::ceil(p.d_out_m / (p.v_out_mps * p.s_min_s));
    const double r = interval_growth_ratio(p);
    const double arg = 1.0 + p.d_out_m * (r - 1.0) / (p.v_out_mps * p.s_min_s);
    return 1.0 + std::ceil(std::log(arg) / std::log(r));
}

double trip_energy_j(const TripParams& p) {
    return n_in(p) * p.e_in_j + n_out(p) * p.e_out_j;
}

std::optional<std::pair<double, double>> select_params(double budget_j, TripParams fixed,
                                                       const std::vector<double>& s_min_grid,
                                                       const std::vector<double>& s_max_grid) {
    std::optional<std::pair<double, double>> best;
    for (double s_max : s_max_grid) {
        for (double s_min : s_min_grid) {
            if (s_min > s_max) continue;
            TripParams p = fixed;
            p.s_min_s = s_min;
            p.s_max_s = s_max;
            if (!p.valid()) continue;
            if (trip_energy_j(p) > budget_j) continue;
            if (!best || s_max < best->second ||
                (s_max == best->second && s_min < best->first)) {
                best = {s_min, s_max};
            }
        }
    }
    return best;
}

std::vector<EnergyCurvePoint> energy_curve(const TripParams& p,
                                           const std::vector<double>& s_max_values) {
    std::vector<EnergyCurvePoint> out;
    out.reserve(s_max_values.size());
    for (double s_max : s_max_values) {
        TripParams q = p;
        q.s_max_s = s_max;
        out.push_back({s_max, trip_energy_j(q)});
    }
    return out;
}

}  // namespace hotspot
