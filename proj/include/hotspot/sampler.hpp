#pragma once

#include <optional>
#include <vector>

#include "hotspot/hotspot_engine.hpp"
#include "hotspot/road_network.hpp"

namespace hotspot {

struct SamplerParams {
    double s_min_s = 1.0;
    double s_max_s = 120.0;
    double poll_interval_s = 60.0;     // hotspot-list refresh period
    double expedite_ttl_s = 300.0;     // directive lifetime unless renewed
    bool straight_line_distance = false;  // road distance by default
};

/// The distance-driven sampling interval: peak rate inside the congestion
/// zone, then growing with distance, bounded by s_max.
double next_interval_s(double d_m, double d_in_m, const SamplerParams& p);

/// Algebraically simplified form of the same law in terms of x = d - d_in,
/// kept separate so the two routes can be checked against each other.
double next_interval_simplified_s(double x_m, double d_in_m, const SamplerParams& p);

struct NearestHotspot {
    double distance_m = 0.0;
    HotspotRecord record;
};

/// Road distance from a network position to the closer endpoint of the
/// nearest active hotspot's segment. Unreachable hotspots are skipped; empty
/// when none is reachable.
std::optional<NearestHotspot> distance_to_nearest_hotspot(const NetPosition& pos,
                                                          const std::vector<HotspotRecord>& hotspots,
                                                          const RoadNetwork& net,
                                                          const SamplerParams& params,
                                                          RouteScratch& scratch);

/// Client-side sampling controller state. One per simulated device.
class SamplerState {
  public:
    explicit SamplerState(SamplerParams params = {}) : params_(params) {}

    const SamplerParams& params() const { return params_; }

    void set_driving(bool driving) { driving_ = driving; }
    bool driving() const { return driving_; }

    /// Marks the start of a driving episode; the first sample falls one
    /// interval after this, per the interval in force at `pos`.
    void start_driving(double now, const NetPosition& pos, const RoadNetwork& net,
                       RouteScratch& scratch);

    void receive_hotspots(std::vector<HotspotRecord> list, double now) {
        hotspot_cache_ = std::move(list);
        cache_fetch_t_ = now;
    }
    const std::vector<HotspotRecord>& hotspot_cache() const { return hotspot_cache_; }
    bool cache_stale(double now) const {
        return cache_fetch_t_ < 0.0 || now - cache_fetch_t_ >= params_.poll_interval_s;
    }

    void receive_expedite(double now) { expedite_until_ = now + params_.expedite_ttl_s; }
    void clear_expedite() { expedite_until_ = -1.0; }
    bool expedited(double now) const { return now <= expedite_until_; }

    /// Decides whether a sample is due at `now`; when it is, records the
    /// sample time and computes the next interval from the current distance
    /// to the nearest hotspot. Not driving -> never samples.
    struct TickResult {
        bool sample_now = false;
        double next_interval_s = 0.0;
    };
    TickResult tick(double now, const NetPosition& pos, const RoadNetwork& net,
                    RouteScratch& scratch);

    double current_interval_s() const { return interval_s_; }
    double last_sample_t() const { return last_sample_t_; }
    void force_due(double now) { last_sample_t_ = now - interval_s_; }

  private:
    SamplerParams params_;
    std::vector<HotspotRecord> hotspot_cache_;
    double cache_fetch_t_ = -1.0;
    double last_sample_t_ = -1.0e300;
    double interval_s_ = 0.0;
    double expedite_until_ = -1.0;
    bool driving_ = false;
};

}  // namespace hotspot
