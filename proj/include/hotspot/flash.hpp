#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/parallel.hpp"

namespace hotspot {

/// Fluid model of congestion building up behind an incident. Rates are per
/// minute and all times are minutes.
struct IncidentParams {
    double lambda_a = 10.0;     // vehicles/min entering the segment
    double lambda_d = 5.0;      // vehicles/min draining past the incident
    double s_current_min = 2.0; // sampling interval in force on the segment
    int n_required = 30;        // low-speed samples needed to confirm
    double s_min_min = 1.0;     // peak interval used by Expedited alerting
    double horizon_min = 480.0;

    bool valid() const {
        return lambda_a >= lambda_d && lambda_d >= 0.0 && s_current_min > 0.0 &&
               n_required >= 1 && s_min_min > 0.0 && horizon_min > 0.0;
    }
};

enum class AlertMode { Regular, Expedited };

const char* to_string(AlertMode m);
std::optional<AlertMode> alert_mode_from_string(const std::string& s);

/// Vehicles accumulated on the segment after t minutes: (lambda_a - lambda_d) t.
double vehicles_at(double t_min, const IncidentParams& p);

/// Samples the server has received by t: (lambda_a - lambda_d) t^2 / (2 S).
double samples_received(double t_min, const IncidentParams& p);

/// Time to collect n_required samples: sqrt(2 N S / (lambda_a - lambda_d)).
/// Requires lambda_a > lambda_d.
double detection_time_min(const IncidentParams& p);

struct IncidentRun {
    bool detected = false;
    double detect_min = 0.0;     // time of the n_required-th low-speed report
    int samples_collected = 0;   // partial count when timed out
};

/// Seeded discrete-event run of the incident: Poisson arrivals, deterministic
/// drain at lambda_d, each queued vehicle reporting every s_current (or s_min
/// once Expedited alerting has been triggered by the first report).
IncidentRun simulate_incident(const IncidentParams& p, AlertMode mode, std::uint64_t seed);

struct FlashSweepRow {
    double rate_diff = 0.0;
    AlertMode mode = AlertMode::Regular;
    std::uint64_t seed = 0;
    double detect_min = 0.0;     // NaN when timed out
    double closed_form_min = 0.0;
};

/// Runs both alerting modes across seeds; rows ordered (seed, mode).
std::vector<FlashSweepRow> flash_sweep(const IncidentParams& p,
                                       const std::vector<std::uint64_t>& seeds,
                                       Exec exec = Exec::Serial);

}  // namespace hotspot
