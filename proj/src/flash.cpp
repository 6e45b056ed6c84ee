#include "hotspot/flash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace hotspot {

const char* to_string(AlertMode m) {
    return m == AlertMode::Regular ? "regular" : "expedited";
}

std::optional<AlertMode> alert_mode_from_string(const std::string& s) {
    if (s == "regular") return AlertMode::Regular;
    if (s == "expedited") return AlertMode::Expedited;
    return std::nullopt;
}

double vehicles_at(double t_min, const IncidentParams& p) {
    return (p.lambda_a - p.lambda_d) * t_min;
}

double samples_received(double t_min, const IncidentParams& p) {
    return (p.lambda_a - p.lambda_d) * t_min * t_min / (2.0 * p.s_current_min);
}

double detection_time_min(const IncidentParams& p) {
    if (!(p.lambda_a > p.lambda_d))
        throw std::invalid_argument("detection_time: requires lambda_a > lambda_d");
    return std::sqrt(2.0 * p.n_required * p.s_current_min / (p.lambda_a - p.lambda_d));
}

IncidentRun simulate_incident(const IncidentParams& p, AlertMode mode, std::uint64_t seed) {
    if (!p.valid()) throw std::invalid_argument("simulate_incident: invalid parameters");

    struct Vehicle {
        double arrival = 0.0;
        double phase = 0.0;      // fraction of an interval until the first report
        double next_due = 0.0;
        bool present = false;
    };

    // All randomness is drawn up front so Regular and Expedited runs with the
    // same seed see identical arrival streams and phases.
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(p.lambda_a);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vehicle> vehicles;
    for (double t = gap(rng); t < p.horizon_min; t += gap(rng)) {
        Vehicle v;
        v.arrival = t;
        v.phase = uni(rng);
        vehicles.push_back(v);
    }

    const double drain_step =
        p.lambda_d > 0.0 ? 1.0 / p.lambda_d : std::numeric_limits<double>::infinity();
    double next_drain = drain_step;
    std::size_t next_arrival = 0;
    std::size_t oldest_present = 0;  // FIFO drain pointer

    using Due = std::pair<double, std::size_t>;
    std::priority_queue<Due, std::vector<Due>, std::greater<>> due;

    bool expedited_active = false;
    int collected = 0;
    IncidentRun run;

    auto interval_now = [&]() { return expedited_active ? p.s_min_min : p.s_current_min; };

    while (true) {
        double t_arr = next_arrival < vehicles.size() ? vehicles[next_arrival].arrival
                                                      : std::numeric_limits<double>::infinity();
        double t_sample = due.empty() ? std::numeric_limits<double>::infinity() : due.top().first;
        double t_next = std::min({t_arr, next_drain, t_sample});
        if (!std::isfinite(t_next) || t_next > p.horizon_min) break;

        if (t_next == t_arr) {
            Vehicle& v = vehicles[next_arrival];
            v.present = true;
            v.next_due = v.arrival + v.phase * interval_now();
            due.emplace(v.next_due, next_arrival);
            ++next_arrival;
        } else if (t_next == t_sample && (due.empty() ? false : true)) {
            auto [t, idx] = due.top();
            due.pop();
            Vehicle& v = vehicles[idx];
            if (v.present && t == v.next_due) {
                // A queued vehicle reports a sub-threshold speed.
                ++collected;
                if (collected >= p.n_required) {
                    run.detected = true;
                    run.detect_min = t;
                    run.samples_collected = collected;
                    return run;
                }
                if (mode == AlertMode::Expedited && !expedited_active) {
                    expedited_active = true;
                    // Every queued vehicle switches to the peak rate.
                    std::vector<Due> rescheduled;
                    for (std::size_t i = oldest_present; i < next_arrival; ++i) {
                        Vehicle& w = vehicles[i];
                        if (!w.present || i == idx) continue;
                        const double sooner = t + p.s_min_min;
                        if (sooner < w.next_due) {
                            w.next_due = sooner;
                            rescheduled.emplace_back(sooner, i);
                        }
                    }
                    for (const Due& d : rescheduled) due.push(d);
                }
                v.next_due = t + interval_now();
                due.emplace(v.next_due, idx);
            }
            // Stale queue entries (departed vehicles or superseded due times)
            // fall through and are dropped.
        } else {
            // Drain event: the oldest queued vehicle clears the incident.
            while (oldest_present < next_arrival && !vehicles[oldest_present].present)
                ++oldest_present;
            if (oldest_present < next_arrival) vehicles[oldest_present].present = false;
            next_drain += drain_step;
        }
    }

    run.detected = false;
    run.detect_min = std::numeric_limits<double>::quiet_NaN();
    run.samples_collected = collected;
    return run;
}

std::vector<FlashSweepRow> flash_sweep(const IncidentParams& p,
                                       const std::vector<std::uint64_t>& seeds, Exec exec) {
    std::vector<FlashSweepRow> rows(seeds.size() * 2);
    const double closed =
        p.lambda_a > p.lambda_d ? detection_time_min(p) : std::numeric_limits<double>::quiet_NaN();

    const int n = static_cast<int>(seeds.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < 2; ++m) {
            const AlertMode mode = m == 0 ? AlertMode::Regular : AlertMode::Expedited;
            const IncidentRun r = simulate_incident(p, mode, seeds[i]);
            FlashSweepRow row;
            row.rate_diff = p.lambda_a - p.lambda_d;
            row.mode = mode;
            row.seed = seeds[i];
            row.detect_min = r.detected ? r.detect_min : std::numeric_limits<double>::quiet_NaN();
            row.closed_form_min = closed;
            rows[static_cast<std::size_t>(i) * 2 + m] = row;
        }
    }
    return rows;
}

}  // namespace hotspot
