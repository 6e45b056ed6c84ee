#include "hotspot/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "hotspot/errors.hpp"

namespace hotspot {

namespace {

constexpr double kGridCellM = 250.0;
constexpr double kMetersPerDegLat = kEarthRadiusM * kPi / 180.0;

struct NodeRecord {
    NodeId id;
    GeoPoint pos;
};

}  // namespace

GeoPoint RoadSegment::midpoint() const {
    const double half = length_m / 2.0;
    auto it = std::upper_bound(cum_length_m.begin(), cum_length_m.end(), half);
    std::size_t leg = std::min<std::size_t>(std::distance(cum_length_m.begin(), it),
                                            polyline.size() - 1);
    if (leg == 0) leg = 1;
    const double leg_len = cum_length_m[leg] - cum_length_m[leg - 1];
    const double t = leg_len > 0 ? (half - cum_length_m[leg - 1]) / leg_len : 0.0;
    const GeoPoint& p = polyline[leg - 1];
    const GeoPoint& q = polyline[leg];
    return GeoPoint(p.lat + t * (q.lat - p.lat), p.lon + t * (q.lon - p.lon));
}

RoadNetwork RoadNetwork::load(const std::string& path) { return load_network(path); }

RoadNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file: " + path);

    std::vector<std::pair<NodeId, GeoPoint>> nodes;
    std::vector<RoadSegment> segments;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;

        if (tag == "N") {
            NodeId id;
            double lat, lon;
            if (!(ls >> id >> lat >> lon))
                throw ParseError("line " + std::to_string(lineno) + ": malformed node record");
            try {
                nodes.emplace_back(id, GeoPoint(lat, lon));
            } catch (const std::invalid_argument& e) {
                throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
            }
        } else if (tag == "S") {
            RoadSegment seg;
            std::string poly;
            if (!(ls >> seg.id >> seg.node_a >> seg.node_b >> poly))
                throw ParseError("line " + std::to_string(lineno) + ": malformed segment record");
            std::istringstream ps(poly);
            std::string pt;
            while (std::getline(ps, pt, ';')) {
                const auto comma = pt.find(',');
                if (comma == std::string::npos)
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": polyline point missing comma: " + pt);
                try {
                    seg.polyline.emplace_back(std::stod(pt.substr(0, comma)),
                                              std::stod(pt.substr(comma + 1)));
                } catch (const std::exception&) {
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": bad polyline coordinate: " + pt);
                }
            }
            if (seg.polyline.size() < 2)
                throw ValidationError("segment " + std::to_string(seg.id) +
                                      " (line " + std::to_string(lineno) +
                                      "): polyline needs at least 2 points");
            segments.push_back(std::move(seg));
        } else {
            throw ParseError("line " + std::to_string(lineno) + ": unknown record tag '" + tag +
                             "'");
        }
    }
    return RoadNetwork::from_records(nodes, segments);
}

RoadNetwork RoadNetwork::from_records(const std::vector<std::pair<NodeId, GeoPoint>>& nodes,
                                      const std::vector<RoadSegment>& segments) {
    RoadNetwork net;

    std::unordered_map<NodeId, std::size_t> node_index;
    node_index.reserve(nodes.size());
    for (const auto& [id, pos] : nodes) {
        if (!node_index.emplace(id, net.node_pos_.size()).second)
            throw ValidationError("duplicate node id " + std::to_string(id));
        net.node_pos_.push_back(pos);
        net.node_ids_.push_back(id);
    }

    net.segments_ = segments;
    std::sort(net.segments_.begin(), net.segments_.end(),
              [](const RoadSegment& a, const RoadSegment& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < net.segments_.size(); ++i) {
        if (net.segments_[i].id == net.segments_[i - 1].id)
            throw ValidationError("duplicate segment id " + std::to_string(net.segments_[i].id));
    }

    net.seg_a_idx_.resize(net.segments_.size());
    net.seg_b_idx_.resize(net.segments_.size());
    net.node_arcs_.assign(net.node_pos_.size(), {});

    for (std::size_t i = 0; i < net.segments_.size(); ++i) {
        RoadSegment& seg = net.segments_[i];
        const auto a = node_index.find(seg.node_a);
        const auto b = node_index.find(seg.node_b);
        if (a == node_index.end())
            throw ValidationError("segment " + std::to_string(seg.id) + ": unknown node " +
                                  std::to_string(seg.node_a));
        if (b == node_index.end())
            throw ValidationError("segment " + std::to_string(seg.id) + ": unknown node " +
                                  std::to_string(seg.node_b));
        net.seg_a_idx_[i] = a->second;
        net.seg_b_idx_[i] = b->second;

        seg.cum_length_m.resize(seg.polyline.size());
        seg.cum_length_m[0] = 0.0;
        for (std::size_t k = 1; k < seg.polyline.size(); ++k)
            seg.cum_length_m[k] =
                seg.cum_length_m[k - 1] + haversine_m(seg.polyline[k - 1], seg.polyline[k]);
        seg.length_m = seg.cum_length_m.back();
        if (!(seg.length_m > 0.0))
            throw ValidationError("segment " + std::to_string(seg.id) + ": zero length");
        if (seg.length_m < 10.0 || seg.length_m > 1000.0)
            net.warnings_.push_back("segment " + std::to_string(seg.id) + ": length " +
                                    std::to_string(seg.length_m) +
                                    " m outside typical range [10, 1000]");

        net.node_arcs_[a->second].push_back({i, b->second, seg.length_m});
        net.node_arcs_[b->second].push_back({i, a->second, seg.length_m});
    }

    net.build_indexes();
    return net;
}

void RoadNetwork::build_indexes() {
    if (segments_.empty()) return;

    double lat_min = 90, lat_max = -90, lon_min = 180, lon_max = -180;
    for (const auto& seg : segments_)
        for (const auto& p : seg.polyline) {
            lat_min = std::min(lat_min, p.lat);
            lat_max = std::max(lat_max, p.lat);
            lon_min = std::min(lon_min, p.lon);
            lon_max = std::max(lon_max, p.lon);
        }

    const double mid_lat = (lat_min + lat_max) / 2.0;
    const double m_per_deg_lon =
        std::max(1.0, kMetersPerDegLat * std::cos(deg2rad(mid_lat)));
    grid_.lat0 = lat_min;
    grid_.lon0 = lon_min;
    grid_.cell_lat = kGridCellM / kMetersPerDegLat;
    grid_.cell_lon = kGridCellM / m_per_deg_lon;
    grid_.nx = std::max(1, static_cast<int>((lon_max - lon_min) / grid_.cell_lon) + 1);
    grid_.ny = std::max(1, static_cast<int>((lat_max - lat_min) / grid_.cell_lat) + 1);
    grid_.cells.assign(static_cast<std::size_t>(grid_.nx) * grid_.ny, {});

    for (std::size_t i = 0; i < segments_.size(); ++i) {
        double slat_min = 90, slat_max = -90, slon_min = 180, slon_max = -180;
        for (const auto& p : segments_[i].polyline) {
            slat_min = std::min(slat_min, p.lat);
            slat_max = std::max(slat_max, p.lat);
            slon_min = std::min(slon_min, p.lon);
            slon_max = std::max(slon_max, p.lon);
        }
        const int x0 = std::clamp(static_cast<int>((slon_min - grid_.lon0) / grid_.cell_lon), 0,
                                  grid_.nx - 1);
        const int x1 = std::clamp(static_cast<int>((slon_max - grid_.lon0) / grid_.cell_lon), 0,
                                  grid_.nx - 1);
        const int y0 = std::clamp(static_cast<int>((slat_min - grid_.lat0) / grid_.cell_lat), 0,
                                  grid_.ny - 1);
        const int y1 = std::clamp(static_cast<int>((slat_max - grid_.lat0) / grid_.cell_lat), 0,
                                  grid_.ny - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                grid_.cells[static_cast<std::size_t>(y) * grid_.nx + x].push_back(
                    static_cast<std::uint32_t>(i));
    }
}

const RoadSegment* RoadNetwork::find_segment(SegmentId id) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), id,
                               [](const RoadSegment& s, SegmentId v) { return s.id < v; });
    if (it == segments_.end() || it->id != id) return nullptr;
    return &*it;
}

const RoadSegment& RoadNetwork::segment(SegmentId id) const {
    const RoadSegment* s = find_segment(id);
    if (!s) throw ValidationError("unknown segment id " + std::to_string(id));
    return *s;
}

std::vector<SegmentId> RoadNetwork::adjacent_segments(SegmentId id) const {
    const RoadSegment* s = find_segment(id);
    if (!s) return {};
    const std::size_t idx = static_cast<std::size_t>(s - segments_.data());
    std::vector<SegmentId> out;
    for (std::size_t node : {seg_a_idx_[idx], seg_b_idx_[idx]})
        for (const Arc& arc : node_arcs_[node])
            if (arc.seg != idx) out.push_back(segments_[arc.seg].id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

/// Closest point on one segment's polyline in a local planar frame centered
/// on the query point. Returns (offset, deviation, geo point).
void project_to_segment(const RoadSegment& seg, const GeoPoint& p, const LocalFrame& frame,
                        double& best_offset, double& best_dev, GeoPoint& best_pt) {
    best_dev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < seg.polyline.size(); ++k) {
        double x1, y1, x2, y2;
        frame.to_xy(seg.polyline[k - 1], p, x1, y1);
        frame.to_xy(seg.polyline[k], p, x2, y2);
        const double dx = x2 - x1, dy = y2 - y1;
        const double len2 = dx * dx + dy * dy;
        double t = 0.0;
        if (len2 > 0.0) t = std::clamp(-(x1 * dx + y1 * dy) / len2, 0.0, 1.0);
        const double cx = x1 + t * dx, cy = y1 + t * dy;
        const double d2 = cx * cx + cy * cy;
        if (d2 < best_dev * best_dev) {
            const GeoPoint& a = seg.polyline[k - 1];
            const GeoPoint& b = seg.polyline[k];
            best_pt = GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon));
            best_dev = std::sqrt(d2);
            best_offset = seg.cum_length_m[k - 1] + t * (seg.cum_length_m[k] - seg.cum_length_m[k - 1]);
        }
    }
}

}  // namespace

std::optional<SnapResult> RoadNetwork::snap(const GeoPoint& p, double max_snap_m) const {
    if (segments_.empty()) return std::nullopt;

    const LocalFrame frame(p);
    SnapResult best;
    double best_dev = std::numeric_limits<double>::infinity();

    auto consider = [&](std::uint32_t idx) {
        const RoadSegment& seg = segments_[idx];
        double off = 0.0, dev = 0.0;
        GeoPoint cp;
        project_to_segment(seg, p, frame, off, dev, cp);
        // Haversine deviation so callers see the same metric road_distance uses.
        dev = haversine_m(p, cp);
        if (dev < best_dev || (dev == best_dev && seg.id < best.segment)) {
            best_dev = dev;
            best = SnapResult{seg.id, std::min(off, seg.length_m), dev};
        }
    };

    const bool use_grid = std::isfinite(max_snap_m) && grid_.nx > 0 &&
                          max_snap_m < kGridCellM * std::max(grid_.nx, grid_.ny);
    if (use_grid) {
        const int ring = static_cast<int>(max_snap_m / kGridCellM) + 1;
        const int cx = static_cast<int>((p.lon - grid_.lon0) / grid_.cell_lon);
        const int cy = static_cast<int>((p.lat - grid_.lat0) / grid_.cell_lat);
        std::vector<std::uint32_t> seen;
        for (int y = std::max(0, cy - ring); y <= std::min(grid_.ny - 1, cy + ring); ++y)
            for (int x = std::max(0, cx - ring); x <= std::min(grid_.nx - 1, cx + ring); ++x)
                for (std::uint32_t idx : grid_.cells[static_cast<std::size_t>(y) * grid_.nx + x])
                    seen.push_back(idx);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::uint32_t idx : seen) consider(idx);
    } else {
        for (std::uint32_t idx = 0; idx < segments_.size(); ++idx) consider(idx);
    }

    if (!std::isfinite(best_dev) || best_dev > max_snap_m) return std::nullopt;
    return best;
}

GeoPoint RoadNetwork::point_at(const NetPosition& pos) const {
    const RoadSegment& seg = segment(pos.segment);
    const double off = std::clamp(pos.offset_m, 0.0, seg.length_m);
    auto it = std::upper_bound(seg.cum_length_m.begin(), seg.cum_length_m.end(), off);
    std::size_t leg = std::min<std::size_t>(std::distance(seg.cum_length_m.begin(), it),
                                            seg.polyline.size() - 1);
    if (leg == 0) leg = 1;
    const double leg_len = seg.cum_length_m[leg] - seg.cum_length_m[leg - 1];
    const double t = leg_len > 0 ? (off - seg.cum_length_m[leg - 1]) / leg_len : 0.0;
    const GeoPoint& a = seg.polyline[leg - 1];
    const GeoPoint& b = seg.polyline[leg];
    return GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon));
}

std::optional<double> RoadNetwork::road_distance(const NetPosition& a,
                                                 const NetPosition& b) const {
    RouteScratch scratch;
    return road_distance(a, b, scratch);
}

std::optional<double> RoadNetwork::road_distance(const NetPosition& a, const NetPosition& b,
                                                 RouteScratch& scratch) const {
    const RoadSegment* sa = find_segment(a.segment);
    const RoadSegment* sb = find_segment(b.segment);
    if (!sa || !sb) throw ValidationError("road_distance: unknown segment id");
    const double off_a = std::clamp(a.offset_m, 0.0, sa->length_m);
    const double off_b = std::clamp(b.offset_m, 0.0, sb->length_m);
    const std::size_t ia = static_cast<std::size_t>(sa - segments_.data());
    const std::size_t ib = static_cast<std::size_t>(sb - segments_.data());

    double best = std::numeric_limits<double>::infinity();
    if (ia == ib) best = std::abs(off_a - off_b);

    // Dijkstra from a's two endpoint seeds toward b's endpoints.
    if (scratch.dist.size() != node_pos_.size()) {
        scratch.dist.assign(node_pos_.size(), 0.0);
        scratch.stamp.assign(node_pos_.size(), 0);
        scratch.epoch = 0;
    }
    ++scratch.epoch;
    if (scratch.epoch == 0) {  // stamp wraparound
        std::fill(scratch.stamp.begin(), scratch.stamp.end(), 0);
        scratch.epoch = 1;
    }
    const std::uint32_t epoch = scratch.epoch;
    auto get_dist = [&](std::size_t n) {
        return scratch.stamp[n] == epoch ? scratch.dist[n]
                                         : std::numeric_limits<double>::infinity();
    };

    using QE = std::pair<double, std::size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    auto relax = [&](std::size_t n, double d) {
        if (d < get_dist(n)) {
            scratch.dist[n] = d;
            scratch.stamp[n] = epoch;
            pq.emplace(d, n);
        }
    };
    relax(seg_a_idx_[ia], off_a);
    relax(seg_b_idx_[ia], sa->length_m - off_a);

    const std::size_t tgt_a = seg_a_idx_[ib];
    const std::size_t tgt_b = seg_b_idx_[ib];
    while (!pq.empty()) {
        auto [d, n] = pq.top();
        pq.pop();
        if (d > get_dist(n)) continue;
        if (d >= best) break;
        if (n == tgt_a) best = std::min(best, d + off_b);
        if (n == tgt_b) best = std::min(best, d + (sb->length_m - off_b));
        for (const Arc& arc : node_arcs_[n]) relax(arc.to, d + arc.length);
    }

    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

}  // namespace hotspot
