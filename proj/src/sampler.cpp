#include "hotspot/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace hotspot {

double next_interval_s(double d_m, double d_in_m, const SamplerParams& p) {
    double y;
    if (d_m <= d_in_m) {
        y = p.s_min_s;
    } else {
        y = p.s_min_s + (1.0 - d_in_m / d_m) * (p.s_max_s - p.s_min_s);
    }
    return std::clamp(y, p.s_min_s, p.s_max_s);
}

double next_interval_simplified_s(double x_m, double d_in_m, const SamplerParams& p) {
    if (x_m <= 0.0) return p.s_min_s;
    const double y = (p.s_max_s * x_m + d_in_m * p.s_min_s) / (d_in_m + x_m);
    return std::clamp(y, p.s_min_s, p.s_max_s);
}

std::optional<NearestHotspot> distance_to_nearest_hotspot(
    const NetPosition& pos, const std::vector<HotspotRecord>& hotspots, const RoadNetwork& net,
    const SamplerParams& params, RouteScratch& scratch) {
    std::optional<NearestHotspot> best;
    for (const HotspotRecord& h : hotspots) {
        const RoadSegment* seg = net.find_segment(h.segment);
        if (!seg) continue;

        double d;
        if (pos.segment == h.segment) {
            d = 0.0;  // containment
        } else if (params.straight_line_distance) {
            const GeoPoint p = net.point_at(pos);
            d = std::min(haversine_m(p, seg->polyline.front()),
                         haversine_m(p, seg->polyline.back()));
        } else {
            const auto da = net.road_distance(pos, {h.segment, 0.0}, scratch);
            const auto db = net.road_distance(pos, {h.segment, seg->length_m}, scratch);
            if (!da && !db) continue;  // unreachable hotspot
            d = std::min(da.value_or(std::numeric_limits<double>::infinity()),
                         db.value_or(std::numeric_limits<double>::infinity()));
        }
        if (!best || d < best->distance_m ||
            (d == best->distance_m && h.segment < best->record.segment)) {
            best = NearestHotspot{d, h};
        }
    }
    return best;
}

namespace {

double interval_from_position(const SamplerState& st, double now, const NetPosition& pos,
                              const RoadNetwork& net, RouteScratch& scratch) {
    const SamplerParams& p = st.params();
    if (st.expedited(now)) return p.s_min_s;
    const auto nearest = distance_to_nearest_hotspot(pos, st.hotspot_cache(), net, p, scratch);
    // No reachable hotspot: sample at the discovery floor s_max.
    if (!nearest) return p.s_max_s;
    return next_interval_s(nearest->distance_m, nearest->record.d_in_m, p);
}

}  // namespace

void SamplerState::start_driving(double now, const NetPosition& pos, const RoadNetwork& net,
                                 RouteScratch& scratch) {
    driving_ = true;
    last_sample_t_ = now;
    interval_s_ = interval_from_position(*this, now, pos, net, scratch);
}

SamplerState::TickResult SamplerState::tick(double now, const NetPosition& pos,
                                            const RoadNetwork& net, RouteScratch& scratch) {
    if (!driving_) return {false, 0.0};
    // An expedite directive shortens the interval already in force.
    const double due =
        expedited(now) ? std::min(interval_s_, params_.s_min_s) : interval_s_;
    if (now - last_sample_t_ < due) return {false, interval_s_};
    last_sample_t_ = now;
    interval_s_ = interval_from_position(*this, now, pos, net, scratch);
    return {true, interval_s_};
}

}  // namespace hotspot
