#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/config.hpp"
#include "hotspot/flash.hpp"
#include "hotspot/hotspot_engine.hpp"
#include "hotspot/road_network.hpp"
#include "hotspot/sampler.hpp"

namespace hotspot {

/// One simulated vehicle: a connected segment route, per-leg mean speeds, a
/// departure time. Legs are traversed end to end from start_offset_m.
struct VehicleSpec {
    std::int64_t id = 0;
    double depart_s = 0.0;
    std::vector<SegmentId> route;
    std::vector<double> leg_speed_mps;  // same length as route
    double start_offset_m = 0.0;
};

/// Warm-start hotspot: marks a segment as an established hotspot before the
/// run begins.
struct HotspotSeed {
    SegmentId segment = 0;
    double d_in_m = 2000.0;
    double v_max_mps = 14.0;
    double bin_mean_mps = 1.5;
    int bin_count = 40;
};

/// Flash-congestion scenario: vehicles spawned along spawn_route, a crawl on
/// the incident segment from t0, and a release gate draining at lambda_d.
struct IncidentSpec {
    bool active = false;
    SegmentId segment = 0;
    double t0_s = 0.0;
    double clear_s = -1.0;  // < 0: never cleared
    double lambda_a_per_min = 0.0;
    double lambda_d_per_min = 0.0;
    double crawl_mps = 1.0;
    AlertMode mode = AlertMode::Regular;
    std::vector<SegmentId> spawn_route;
    double spawn_speed_mps = 12.5;
};

enum class SamplingMode { Adaptive, Continuous };

struct SimConfig {
    AppConfig app;
    std::string network_path;
    std::string vehicles_path;
    std::vector<VehicleSpec> vehicles;
    std::vector<HotspotSeed> hotspot_seeds;
    IncidentSpec incident;
    SamplingMode mode = SamplingMode::Adaptive;

    /// Reads the flat config file plus the vehicles CSV it references.
    static SimConfig load(const std::string& path);

    /// Route connectivity, segment existence, positive speeds.
    void validate(const RoadNetwork& net) const;
};

/// Vehicles CSV: id,depart_s,route_segs,speed_mps where route_segs is a
/// ';'-separated list of segment ids, each optionally '@speed' to override
/// the per-vehicle default for that leg.
std::vector<VehicleSpec> load_vehicles_csv(const std::string& path);

struct VehicleReport {
    std::int64_t id = 0;
    std::uint64_t samples = 0;
    double joules = 0.0;
    double bytes = 0.0;
    std::optional<double> true_zone_entry_t;
    std::optional<double> first_in_zone_sample_t;
    std::optional<double> zone_entry_delay_s;
    std::vector<double> emitted_intervals;  // filled when record_intervals set
};

struct SimReport {
    std::vector<VehicleReport> per_vehicle;

    std::uint64_t samples_emitted = 0;
    std::uint64_t pairs_formed = 0;
    std::uint64_t ingested = 0;
    std::uint64_t rejected_speed_cap = 0;
    std::uint64_t rejected_snap = 0;
    std::uint64_t skipped_gap = 0;
    std::uint64_t events_processed = 0;
    double total_joules = 0.0;
    double total_bytes = 0.0;
    double horizon_s = 0.0;

    HotspotEngine engine{EngineParams{}, nullptr};

    /// Writes per_vehicle.csv, per_segment.csv, hotspots.csv and global.csv.
    void write_csv(const std::string& dir, const RoadNetwork& net) const;
};

struct RunOptions {
    bool record_intervals = false;
};

/// Deterministic single-threaded discrete-event run. Identical config and
/// seed give identical reports, byte for byte once serialized.
SimReport run(const SimConfig& config, const RoadNetwork& net, RunOptions opts = {});

struct CompareResult {
    SimReport continuous;
    SimReport adaptive;
    double sample_ratio = 0.0;   // continuous / adaptive
    double byte_ratio = 0.0;
    double energy_ratio = 0.0;
    /// Mean over vehicles of (adaptive delay - continuous delay), seconds.
    std::optional<double> delay_delta_s;
};

CompareResult compare_modes(const SimConfig& config, const RoadNetwork& net,
                            RunOptions opts = {});

/// Adds a flash-congestion incident plus its Poisson spawn traffic to the
/// config. Spawn departures are derived from config.app.seed.
void inject_incident(SimConfig& config, SegmentId segment, double t0_s, double lambda_a_per_min,
                     double lambda_d_per_min, const std::vector<SegmentId>& spawn_route,
                     double spawn_speed_mps);

}  // namespace hotspot
