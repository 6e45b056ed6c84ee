#include "hotspot/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hotspot/errors.hpp"
#include "hotspot/kernels.hpp"

namespace hotspot {

namespace {

bool parse_fields(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return !out.empty();
}

bool parse_record(const std::vector<std::string>& f, std::size_t first, TraceRecord& rec) {
    if (f.size() != first + 4) return false;
    try {
        const double lat = std::stod(f[first]);
        const double lon = std::stod(f[first + 1]);
        if (lat < -90 || lat > 90 || lon < -180 || lon > 180) return false;
        rec.pos = GeoPoint(lat, lon);
        rec.occupancy = std::stoi(f[first + 2]);
        rec.t_unix = std::stoll(f[first + 3]);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

void read_one_file(const std::string& path, const std::string& vehicle, bool combined,
                   TraceIngestReport& report, std::vector<TraceRecord>& out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    std::string line;
    std::vector<std::string> fields;
    bool first_line = true;
    while (std::getline(in, line)) {
        ++report.lines_total;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (!parse_fields(line, fields)) {
            ++report.lines_blank;
            continue;
        }
        if (combined && first_line && fields[0] == "vehicle_id") {
            ++report.lines_blank;  // header
            first_line = false;
            continue;
        }
        first_line = false;
        TraceRecord rec;
        if (combined) {
            if (fields.size() == 5 && parse_record(fields, 1, rec)) {
                rec.vehicle = fields[0];
                ++report.lines_parsed;
                out.push_back(std::move(rec));
            } else {
                ++report.parse_errors;
            }
        } else {
            if (parse_record(fields, 0, rec)) {
                rec.vehicle = vehicle;
                ++report.lines_parsed;
                out.push_back(std::move(rec));
            } else {
                ++report.parse_errors;
            }
        }
    }
}

}  // namespace

std::vector<TraceRecord> read_trace(const std::string& path, TraceIngestReport& report) {
    namespace fs = std::filesystem;
    std::vector<TraceRecord> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) read_one_file(f.string(), f.stem().string(), false, report, out);
    } else if (fs::exists(path)) {
        read_one_file(path, "", true, report, out);
    } else {
        throw IoError("trace path does not exist: " + path);
    }
    return out;
}

TraceIngestReport ingest_trace(const std::string& path, const RoadNetwork& net,
                               HotspotEngine& engine, const AppConfig& config, Exec exec) {
    TraceIngestReport report;
    std::vector<TraceRecord> records = read_trace(path, report);

    // Group per vehicle, sort by time, drop duplicate timestamps.
    std::map<std::string, std::vector<TraceRecord>> by_vehicle;
    for (TraceRecord& r : records) by_vehicle[r.vehicle].push_back(std::move(r));
    records.clear();

    for (auto& [veh, recs] : by_vehicle) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const TraceRecord& a, const TraceRecord& b) {
                             return a.t_unix < b.t_unix;
                         });
        std::vector<TraceRecord> kept;
        kept.reserve(recs.size());
        for (TraceRecord& r : recs) {
            if (!kept.empty() && kept.back().t_unix == r.t_unix) {
                ++report.dup_timestamp_dropped;
                continue;
            }
            kept.push_back(std::move(r));
        }
        recs = std::move(kept);
        report.records_kept += recs.size();
        if (recs.size() >= 2) report.pairs_total += recs.size() - 1;
    }
    report.vehicles = by_vehicle.size();

    // Snap every kept fix (order-stable, parallel-friendly).
    std::vector<const std::vector<TraceRecord>*> vehicle_order;
    std::vector<GeoPoint> points;
    for (const auto& [veh, recs] : by_vehicle) {
        vehicle_order.push_back(&recs);
        for (const TraceRecord& r : recs) points.push_back(r.pos);
    }
    const auto snaps = snap_batch(points, net, config.max_snap_m, exec);

    struct PairOut {
        std::int64_t t = 0;
        SegmentId seg = 0;
        double speed = 0.0;
        std::uint32_t veh_idx = 0;
        std::uint32_t pair_idx = 0;
        int outcome = 0;  // 0 ok, 1 snap, 2 gap, 3 unreachable
    };

    std::vector<std::size_t> vehicle_base(vehicle_order.size() + 1, 0);
    for (std::size_t i = 0; i < vehicle_order.size(); ++i)
        vehicle_base[i + 1] = vehicle_base[i] + vehicle_order[i]->size();

    std::vector<std::vector<PairOut>> per_vehicle_pairs(vehicle_order.size());
    const std::int64_t n_veh = static_cast<std::int64_t>(vehicle_order.size());
#pragma omp parallel if (exec == Exec::Parallel)
    {
        RouteScratch scratch;
#pragma omp for schedule(dynamic)
        for (std::int64_t vi = 0; vi < n_veh; ++vi) {
            const std::vector<TraceRecord>& recs = *vehicle_order[vi];
            std::vector<PairOut>& pairs = per_vehicle_pairs[vi];
            for (std::size_t k = 1; k < recs.size(); ++k) {
                PairOut p;
                p.t = recs[k].t_unix;
                p.veh_idx = static_cast<std::uint32_t>(vi);
                p.pair_idx = static_cast<std::uint32_t>(k);
                const auto& s0 = snaps[vehicle_base[vi] + k - 1];
                const auto& s1 = snaps[vehicle_base[vi] + k];
                const double dt = static_cast<double>(recs[k].t_unix - recs[k - 1].t_unix);
                if (!s0 || !s1) {
                    p.outcome = 1;
                } else if (dt > config.gap_max_s) {
                    p.outcome = 2;
                } else {
                    const auto dist = net.road_distance({s0->segment, s0->offset_m},
                                                        {s1->segment, s1->offset_m}, scratch);
                    if (!dist) {
                        p.outcome = 3;
                    } else {
                        p.outcome = 0;
                        p.seg = s1->segment;
                        p.speed = *dist / dt;
                    }
                }
                pairs.push_back(p);
            }
        }
    }

    // Timestamp-ordered replay into the engine.
    std::vector<PairOut> all;
    for (auto& v : per_vehicle_pairs) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(), [](const PairOut& a, const PairOut& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.veh_idx != b.veh_idx) return a.veh_idx < b.veh_idx;
        return a.pair_idx < b.pair_idx;
    });

    for (const PairOut& p : all) {
        switch (p.outcome) {
            case 0: {
                const IngestStatus st = engine.ingest(p.seg, static_cast<double>(p.t), p.speed);
                if (st == IngestStatus::Accepted) ++report.pairs_ingested;
                else ++report.pairs_speed_cap;
                break;
            }
            case 1: ++report.pairs_snap_rejected; break;
            case 2: ++report.pairs_gap_skipped; break;
            case 3: ++report.pairs_unreachable; break;
        }
    }
    return report;
}

std::vector<NdRow> nd_table(const HotspotEngine& engine, Exec exec) {
    std::vector<SegmentId> segs;
    for (const auto& [seg, st] : engine.states()) segs.push_back(seg);

    std::vector<NdRow> rows(segs.size());
    std::vector<char> keep(segs.size(), 0);
    const int min_samples = engine.params().min_samples;
    const std::int64_t n = static_cast<std::int64_t>(segs.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        const SegmentCongestionState& st = *engine.find_state(segs[i]);
        RunningStats pooled;
        bool high = false;
        for (int bin = 0; bin < kBinsPerDay; ++bin) {
            if (st.bins[bin].stats.count() < static_cast<std::uint64_t>(min_samples)) continue;
            pooled.merge(st.bins[bin].stats);
            if (engine.classify(segs[i], bin).level == CongestionLevel::High) high = true;
        }
        if (pooled.count() < 2 || pooled.mean() <= 0.0) continue;
        rows[i] = {segs[i], pooled.stddev() / pooled.mean(), high};
        keep[i] = 1;
    }

    std::vector<NdRow> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) out.push_back(rows[i]);
    return out;
}

std::vector<int> hotspots_over_time(const HotspotEngine& engine) {
    std::vector<int> counts(kBinsPerDay, 0);
    for (const auto& [seg, st] : engine.states())
        for (int bin = 0; bin < kBinsPerDay; ++bin)
            if (engine.classify(seg, bin).level == CongestionLevel::High) ++counts[bin];
    return counts;
}

namespace {

void fmt_g(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf;
}

}  // namespace

void write_nd_cdf_csv(const std::string& path, const std::vector<NdRow>& rows) {
    std::vector<double> hot, other;
    for (const NdRow& r : rows) (r.hotspot ? hot : other).push_back(r.nd);
    std::sort(hot.begin(), hot.end());
    std::sort(other.begin(), other.end());

    std::ofstream f(path);
    f << "class,nd,cdf\n";
    for (std::size_t i = 0; i < hot.size(); ++i) {
        f << "hotspot,";
        fmt_g(f, hot[i]);
        f << ',';
        fmt_g(f, static_cast<double>(i + 1) / static_cast<double>(hot.size()));
        f << '\n';
    }
    for (std::size_t i = 0; i < other.size(); ++i) {
        f << "other,";
        fmt_g(f, other[i]);
        f << ',';
        fmt_g(f, static_cast<double>(i + 1) / static_cast<double>(other.size()));
        f << '\n';
    }
}

void write_hotspots_per_bin_csv(const std::string& path, const std::vector<int>& counts) {
    std::ofstream f(path);
    f << "bin,hotspot_count\n";
    for (std::size_t bin = 0; bin < counts.size(); ++bin)
        f << bin << ',' << counts[bin] << '\n';
}

void write_heatmap_csv(const std::string& path, const HotspotEngine& engine) {
    std::ofstream f(path);
    f << "segment_id,bin,mean_speed,level\n";
    for (const auto& [seg, st] : engine.states()) {
        for (int bin = 0; bin < kBinsPerDay; ++bin) {
            const auto& stats = st.bins[bin].stats;
            if (stats.count() == 0) continue;
            f << seg << ',' << bin << ',';
            fmt_g(f, stats.mean());
            f << ',' << to_string(engine.classify(seg, bin).level) << '\n';
        }
    }
}

}  // namespace hotspot
