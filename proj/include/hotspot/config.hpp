#pragma once

#include <iosfwd>
#include <string>

#include "hotspot/activity.hpp"
#include "hotspot/energy_model.hpp"
#include "hotspot/hotspot_engine.hpp"
#include "hotspot/sampler.hpp"

namespace hotspot {

/// Every tunable in one place, defaulting to the values the analysis uses
/// (d_in 2000 m, s_min 1 s, s_max 120 s, e_in 0.4 J, e_out 7 J, N 30, ...).
/// Configuration files are flat `key = value` text; '#' starts a comment.
struct AppConfig {
    EngineParams engine;
    SamplerParams sampler;
    ActivityParams activity;

    double max_snap_m = 50.0;      // GPS cleansing tolerance for snapping
    double gap_max_s = 300.0;      // max gap between paired trace fixes

    // Trip / energy analysis defaults.
    double v_in_mps = 2.0;
    double v_out_mps = 12.5;
    double d_out_m = 8000.0;
    double e_in_j = 0.4;
    double e_out_j = 7.0;
    double battery_j = 18000.0;
    double budget_j = 560.0;       // stated app budget (3% of battery as used)

    // Simulation accounting.
    double bytes_per_sample = 20.0;
    double noise_sd_frac = 0.1;    // per-segment speed noise, fraction of mean
    double activity_window_s = 30.0;
    double horizon_s = 7200.0;
    std::uint64_t seed = 1;
    double incident_crawl_mps = 1.0;

    TripParams trip() const {
        TripParams t;
        t.d_in_m = engine.default_d_in_m;
        t.d_out_m = d_out_m;
        t.v_in_mps = v_in_mps;
        t.v_out_mps = v_out_mps;
        t.s_min_s = sampler.s_min_s;
        t.s_max_s = sampler.s_max_s;
        t.e_in_j = e_in_j;
        t.e_out_j = e_out_j;
        return t;
    }

    /// Applies one key; false when the key is not an AppConfig key.
    bool apply(const std::string& key, const std::string& value);

    /// Reads a flat key=value file. Unknown keys go through `unknown`; the
    /// default rejects them.
    void load_file(const std::string& path);

    void print(std::ostream& out) const;
};

/// Shared line-format parsing: `key = value` pairs, '#' comments. Calls
/// apply(key, value) per pair; apply throws ParseError on bad keys/values.
void parse_flat_config(const std::string& path,
                       const std::function<void(const std::string&, const std::string&, int)>& apply);

double parse_double(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);

}  // namespace hotspot
