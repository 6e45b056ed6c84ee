#include "hotspot/activity.hpp"

#include <cmath>

#include "hotspot/welford.hpp"

namespace hotspot {

const char* to_string(ActivityReason r) {
    switch (r) {
        case ActivityReason::KnownWifi: return "known_wifi";
        case ActivityReason::GsmHandoff: return "gsm_handoff";
        case ActivityReason::AccelDriving: return "accel_driving";
        case ActivityReason::AccelIdle: return "accel_idle";
        case ActivityReason::NoEvidence: return "no_evidence";
    }
    return "?";
}

bool accel_variance_rule(const std::vector<std::array<double, 3>>& accel,
                         const ActivityParams& params) {
    RunningStats mag;
    for (const auto& a : accel)
        mag.add(std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]));
    if (mag.count() < 2) return false;
    const bool near_gravity =
        std::abs(mag.mean() - params.gravity_mps2) <= params.gravity_tol_mps2;
    return mag.variance() >= params.accel_var_min && near_gravity;
}

ActivityVerdict classify_activity(const SensorSnapshot& snap, const ActivityParams& params,
                                  const AccelClassifier& accel) {
    if (snap.known_wifi_visible) return {false, ActivityReason::KnownWifi};
    if (snap.gsm_towers_in_window > params.gsm_tower_min)
        return {true, ActivityReason::GsmHandoff};
    if (snap.accel_samples.empty()) return {false, ActivityReason::NoEvidence};
    if (accel(snap.accel_samples, params)) return {true, ActivityReason::AccelDriving};
    return {false, ActivityReason::AccelIdle};
}

}  // namespace hotspot
