#pragma once

#include <array>
#include <functional>
#include <vector>

namespace hotspot {

/// Low-energy sensor readings gathered over one detection window.
struct SensorSnapshot {
    bool known_wifi_visible = false;
    int gsm_towers_in_window = 0;
    std::vector<std::array<double, 3>> accel_samples;  // m/s^2, may be empty
    double window_s = 30.0;
};

enum class ActivityReason { KnownWifi, GsmHandoff, AccelDriving, AccelIdle, NoEvidence };

struct ActivityVerdict {
    bool driving = false;
    ActivityReason reason = ActivityReason::NoEvidence;
};

const char* to_string(ActivityReason r);

struct ActivityParams {
    int gsm_tower_min = 3;          // driving when towers seen > this
    double accel_var_min = 0.5;     // (m/s^2)^2 variance floor for motion
    double gravity_mps2 = 9.80665;
    double gravity_tol_mps2 = 3.0;  // |mean magnitude - g| acceptance band
};

/// Pluggable accelerometer-stage classifier so a learned model can replace
/// the variance rule. Returns true when the readings look like driving.
using AccelClassifier = std::function<bool(const std::vector<std::array<double, 3>>&,
                                           const ActivityParams&)>;

bool accel_variance_rule(const std::vector<std::array<double, 3>>& accel,
                         const ActivityParams& params);

/// Driving-vs-not decision tree, cheapest evidence first: known WiFi, then
/// GSM tower churn, then accelerometer.
ActivityVerdict classify_activity(const SensorSnapshot& snap, const ActivityParams& params = {},
                                  const AccelClassifier& accel = accel_variance_rule);

}  // namespace hotspot
