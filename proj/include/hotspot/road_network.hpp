#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/geo.hpp"

namespace hotspot {

using NodeId = std::int64_t;
using SegmentId = std::int64_t;

/// One road segment: a polyline between two graph nodes. Length is always
/// computed from the polyline, never read from a file.
struct RoadSegment {
    SegmentId id = 0;
    NodeId node_a = 0;
    NodeId node_b = 0;
    std::vector<GeoPoint> polyline;      // >= 2 points
    std::vector<double> cum_length_m;    // cumulative length at each vertex
    double length_m = 0.0;

    GeoPoint midpoint() const;
};

/// A position on the network: a segment plus an along-segment offset from the
/// node_a end, in meters.
struct NetPosition {
    SegmentId segment = 0;
    double offset_m = 0.0;
};

struct SnapResult {
    SegmentId segment = 0;
    double offset_m = 0.0;
    double deviation_m = 0.0;
};

/// Reusable Dijkstra buffers for batch shortest-path queries. One per thread.
struct RouteScratch {
    std::vector<double> dist;
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
};

/// Immutable road graph with point snapping and along-road distances.
/// Safe for concurrent reads once loaded.
class RoadNetwork {
  public:
    static RoadNetwork load(const std::string& path);
    static RoadNetwork from_records(const std::vector<std::pair<NodeId, GeoPoint>>& nodes,
                                    const std::vector<RoadSegment>& segments);

    const std::vector<RoadSegment>& segments() const { return segments_; }
    const RoadSegment& segment(SegmentId id) const;
    const RoadSegment* find_segment(SegmentId id) const;
    std::size_t node_count() const { return node_pos_.size(); }
    const std::vector<std::string>& load_warnings() const { return warnings_; }

    /// Segments incident to the same node as `id`, excluding `id` itself.
    std::vector<SegmentId> adjacent_segments(SegmentId id) const;

    /// Nearest segment within max_snap_m of the point, ties broken by lowest
    /// segment id. Empty when everything is farther than max_snap_m.
    std::optional<SnapResult> snap(const GeoPoint& p, double max_snap_m) const;

    /// Geographic point at an along-segment offset (clamped to [0, length]).
    GeoPoint point_at(const NetPosition& pos) const;

    /// Shortest along-road distance between two positions; empty when the
    /// positions are on disconnected components.
    std::optional<double> road_distance(const NetPosition& a, const NetPosition& b) const;
    std::optional<double> road_distance(const NetPosition& a, const NetPosition& b,
                                        RouteScratch& scratch) const;

  private:
    void build_indexes();

    std::vector<RoadSegment> segments_;          // sorted by id
    std::vector<GeoPoint> node_pos_;             // by dense node index
    std::vector<NodeId> node_ids_;               // dense index -> id
    std::vector<std::size_t> seg_a_idx_;         // segment -> dense node index
    std::vector<std::size_t> seg_b_idx_;

    struct Arc {
        std::size_t seg;      // segment index (dense)
        std::size_t to;       // node index
        double length;
    };
    std::vector<std::vector<Arc>> node_arcs_;

    // Uniform cell grid over segment bounding boxes, for snap candidates.
    struct Grid {
        double lat0 = 0, lon0 = 0, cell_lat = 0, cell_lon = 0;
        int nx = 0, ny = 0;
        std::vector<std::vector<std::uint32_t>> cells;
    } grid_;

    std::vector<std::string> warnings_;

    friend class RoadNetworkTestAccess;
};

/// Parses the plain-text network format:
///   N <node_id> <lat> <lon>
///   S <seg_id> <node_a> <node_b> <lat,lon;lat,lon;...>
/// '#' starts a comment. Throws ParseError / ValidationError with the
/// offending line or id in the message.
RoadNetwork load_network(const std::string& path);

}  // namespace hotspot
