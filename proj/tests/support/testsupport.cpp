#include "testsupport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hotspot::testsupport {

int step_oracle_n_out(const TripParams& p, int hard_cap) {
    double x = 0.0;
    double y = p.s_min_s;
    int n = 1;
    while (x < p.d_out_m) {
        x += p.v_out_mps * y;
        // Distance law re-evaluated at the new position.
        y = (p.s_max_s * x + p.d_in_m * p.s_min_s) / (p.d_in_m + x);
        ++n;
        if (n > hard_cap) throw std::runtime_error("step_oracle_n_out: cap exceeded");
    }
    return n;
}

namespace {

struct OracleStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

// Two-pass mean/deviation over the raw history for one bin.
OracleStats brute_bin_stats(const std::vector<RecentSample>& accepted, int bin) {
    OracleStats s;
    double sum = 0.0;
    for (const RecentSample& r : accepted)
        if (time_bin(r.t) == bin) {
            sum += r.speed;
            ++s.count;
        }
    if (s.count == 0) return s;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count >= 2) {
        double acc = 0.0;
        for (const RecentSample& r : accepted)
            if (time_bin(r.t) == bin) acc += (r.speed - s.mean) * (r.speed - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(s.count - 1));
    }
    return s;
}

CongestionLevel brute_classify(const OracleStats& bs, double v_max, const EngineParams& p,
                               bool* insufficient = nullptr) {
    if (insufficient) *insufficient = false;
    if (bs.count < static_cast<std::size_t>(p.min_samples)) {
        if (insufficient) *insufficient = true;
        return CongestionLevel::None;
    }
    const double base = v_max / p.ref_divisor;
    if (bs.mean <= p.tau * base) return CongestionLevel::High;
    if (bs.mean <= 2.0 * p.tau * base) return CongestionLevel::Medium;
    if (bs.mean <= 3.0 * p.tau * base) return CongestionLevel::Low;
    return CongestionLevel::None;
}

}  // namespace

OracleOutcome replay_oracle(const std::vector<RecentSample>& events, const EngineParams& p) {
    OracleOutcome out;
    std::vector<RecentSample> accepted;
    SegState state = SegState::Uncongested;
    CongestionLevel level = CongestionLevel::None;
    double entered_t = 0.0;
    std::size_t accepted_at_entry = 0;  // history length when the state was entered

    auto enter = [&](SegState to, double now) {
        out.transitions.emplace_back(state, to);
        state = to;
        entered_t = now;
        accepted_at_entry = accepted.size();
    };

    for (const RecentSample& ev : events) {
        if (!(ev.speed >= 0.0) || !std::isfinite(ev.speed)) continue;
        if (ev.speed > p.speed_cap_mps) continue;
        accepted.push_back(ev);
        const double now = ev.t;

        // Everything below is recomputed from the raw history.
        double v_max = 0.0;
        for (const RecentSample& r : accepted) v_max = std::max(v_max, r.speed);
        const double t_hot = p.tau * v_max / p.ref_divisor;
        const double t_low = 3.0 * p.tau * v_max / p.ref_divisor;
        const int bin = time_bin(now);
        const OracleStats bs = brute_bin_stats(accepted, bin);

        // Last-W window: the W largest samples by (t, speed).
        std::vector<RecentSample> ring = accepted;
        std::sort(ring.begin(), ring.end(), [](const RecentSample& a, const RecentSample& b) {
            return a.t != b.t ? a.t < b.t : a.speed < b.speed;
        });
        if (ring.size() > static_cast<std::size_t>(p.recent_window))
            ring.erase(ring.begin(), ring.end() - p.recent_window);

        if (state == SegState::PossibleHotspot && now - entered_t > p.t_w_s)
            enter(SegState::Uncongested, now);

        switch (state) {
            case SegState::Uncongested: {
                int lows = 0;
                for (const RecentSample& r : ring)
                    if (r.t >= now - p.t_w_s && r.speed <= t_hot) ++lows;
                if (v_max > 0.0 && lows >= p.k_possible) enter(SegState::PossibleHotspot, now);
                break;
            }
            case SegState::PossibleHotspot: {
                bool genuine = false;
                if (bs.count >= static_cast<std::size_t>(p.min_samples) &&
                    brute_classify(bs, v_max, p) == CongestionLevel::High) {
                    const double nd = bs.mean > 0.0 ? bs.stddev / bs.mean : 0.0;
                    genuine = nd >= p.nd_min || v_max >= 2.0 * bs.mean;
                }
                if (bs.count >= static_cast<std::size_t>(p.n_confirm) && genuine) {
                    enter(SegState::Hotspot, now);
                    level = CongestionLevel::High;
                }
                break;
            }
            case SegState::Hotspot: {
                const std::size_t fresh = accepted.size() - accepted_at_entry;
                if (fresh >= static_cast<std::size_t>(p.n_confirm) && bs.count > 0 &&
                    bs.mean > t_low) {
                    enter(SegState::Uncongested, now);
                    level = CongestionLevel::None;
                } else {
                    level = std::max(brute_classify(bs, v_max, p), CongestionLevel::Low);
                }
                break;
            }
        }
    }

    out.state = state;
    out.level = level;
    return out;
}

double ks_one_sided(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> xs = a;
    xs.insert(xs.end(), b.begin(), b.end());
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (double x : xs) {
        const double fa =
            static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / a.size();
        const double fb =
            static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / b.size();
        d = std::max(d, fb - fa);
    }
    return d;
}

namespace {

constexpr double kMetersPerDegLat = kEarthRadiusM * kPi / 180.0;

void append_node(std::string& out, NodeId id, double lat, double lon) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "N %lld %.12f %.12f\n", static_cast<long long>(id), lat, lon);
    out += buf;
}

void append_segment(std::string& out, SegmentId id, NodeId a, NodeId b, double lat_a, double lon_a,
                    double lat_b, double lon_b) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "S %lld %lld %lld %.12f,%.12f;%.12f,%.12f\n",
                  static_cast<long long>(id), static_cast<long long>(a),
                  static_cast<long long>(b), lat_a, lon_a, lat_b, lon_b);
    out += buf;
}

}  // namespace

std::string corridor_network_text(int n_segments, double seg_len_m, bool with_stub,
                                  SegmentId stub_id) {
    const double lat0 = 12.90, lon0 = 77.50;
    const double dlat = seg_len_m / kMetersPerDegLat;
    std::string out = "# straight corridor fixture\n";
    for (int i = 0; i <= n_segments; ++i) append_node(out, i, lat0 + i * dlat, lon0);
    if (with_stub) append_node(out, 1000, lat0 - dlat, lon0);
    for (int i = 0; i < n_segments; ++i)
        append_segment(out, i, i, i + 1, lat0 + i * dlat, lon0, lat0 + (i + 1) * dlat, lon0);
    if (with_stub)
        append_segment(out, stub_id, 1000, 0, lat0 - dlat, lon0, lat0, lon0);
    return out;
}

std::string grid_network_text(int rows, int cols, double spacing_m, double lat0, double lon0) {
    const double dlat = spacing_m / kMetersPerDegLat;
    const double dlon = spacing_m / (kMetersPerDegLat * std::cos(deg2rad(lat0)));
    std::string out = "# grid fixture\n";
    auto node_id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
    auto lat = [&](int r) { return lat0 + r * dlat; };
    auto lon = [&](int c) { return lon0 + c * dlon; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) append_node(out, node_id(r, c), lat(r), lon(c));
    SegmentId next = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c)
            append_segment(out, next++, node_id(r, c), node_id(r, c + 1), lat(r), lon(c), lat(r),
                           lon(c + 1));
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r + 1 < rows; ++r)
            append_segment(out, next++, node_id(r, c), node_id(r + 1, c), lat(r), lon(c),
                           lat(r + 1), lon(c));
    return out;
}

SfoFixture make_sfo_fixture(int n_vehicles, double duration_s, std::uint64_t seed,
                            double start_hour_local) {
    constexpr int kRows = 12, kCols = 12;
    constexpr double kSpacing = 200.0;
    const double lat0 = 37.70, lon0 = -122.45;

    SfoFixture fx;
    fx.network_text = grid_network_text(kRows, kCols, kSpacing, lat0, lon0);

    // Hotspot corridor: row 6, horizontal segments c = 2..8.
    const int kHorizPerRow = kCols - 1;
    for (int c = 2; c <= 8; ++c) fx.hotspot_segments.push_back(6 * kHorizPerRow + c);

    const double dlat = kSpacing / kMetersPerDegLat;
    const double dlon = kSpacing / (kMetersPerDegLat * std::cos(deg2rad(lat0)));

    auto is_hot = [&](int r0, int c0, int r1, int c1) {
        if (r0 != 6 || r1 != 6) return false;
        const int c = std::min(c0, c1);
        return r0 == r1 && c >= 2 && c <= 8;
    };

    // Local day alignment: traces span 14:00..(14:00 + duration).
    const std::int64_t base_unix =
        86400LL * 19000 + static_cast<std::int64_t>(start_hour_local * 3600.0);
    const auto in_peak = [](std::int64_t t) {
        const int bin = static_cast<int>((t % 86400) / 1800);
        return bin >= 34 && bin <= 36;  // 17:00-18:30
    };

    std::string& csv = fx.trace_csv;
    csv = "vehicle_id,lat,lon,occupancy,unix_time\n";

    for (int veh = 0; veh < n_vehicles; ++veh) {
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (veh + 1)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        const bool commuter = veh < n_vehicles * 3 / 10;
        int r = commuter ? 6 : static_cast<int>(uni(rng) * kRows) % kRows;
        int c = commuter ? 0 : static_cast<int>(uni(rng) * kCols) % kCols;
        int dir = 1;  // commuters shuttle east-west along the row

        // Continuous walk state.
        int r_next = r, c_next = c;
        double edge_pos = 0.0, edge_len = 0.0, speed = 10.0;

        auto pick_next_edge = [&](double t_now) {
            if (commuter) {
                if (c + dir < 0 || c + dir >= kCols) dir = -dir;
                r_next = r;
                c_next = c + dir;
            } else {
                // Random neighbor.
                for (int attempt = 0; attempt < 8; ++attempt) {
                    const int k = static_cast<int>(uni(rng) * 4) % 4;
                    const int dr[4] = {0, 0, 1, -1};
                    const int dc[4] = {1, -1, 0, 0};
                    const int rr = r + dr[k], cc = c + dc[k];
                    if (rr < 0 || rr >= kRows || cc < 0 || cc >= kCols) continue;
                    r_next = rr;
                    c_next = cc;
                    break;
                }
            }
            edge_len = kSpacing;
            edge_pos = 0.0;
            const std::int64_t t_unix = base_unix + static_cast<std::int64_t>(t_now);
            if (is_hot(r, c, r_next, c_next) && in_peak(t_unix))
                speed = 0.5 + 0.3 * uni(rng);  // crawl
            else
                speed = 9.5 + 3.0 * uni(rng);
        };
        pick_next_edge(0.0);

        const double start_offset = veh % 60;
        double t_prev = 0.0;
        for (double t_fix = start_offset; t_fix < duration_s; t_fix += 60.0) {
            // Advance the walk to t_fix.
            double remain = t_fix - t_prev;
            while (remain > 0.0) {
                const double to_end = (edge_len - edge_pos) / speed;
                if (to_end > remain) {
                    edge_pos += speed * remain;
                    remain = 0.0;
                } else {
                    remain -= to_end;
                    r = r_next;
                    c = c_next;
                    pick_next_edge(t_fix - remain);
                }
            }
            t_prev = t_fix;

            const double f = edge_pos / edge_len;
            const double lat = lat0 + (r + f * (r_next - r)) * dlat;
            const double lon = lon0 + (c + f * (c_next - c)) * dlon;
            const std::int64_t t_unix = base_unix + static_cast<std::int64_t>(t_fix);
            char buf[160];
            std::snprintf(buf, sizeof buf, "cab_%03d,%.12f,%.12f,%d,%lld\n", veh, lat, lon,
                          veh % 2, static_cast<long long>(t_unix));
            csv += buf;
            ++fx.fix_count;
        }
    }
    return fx;
}

void write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hotspot::testsupport
