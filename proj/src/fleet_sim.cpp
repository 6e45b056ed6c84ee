#include "hotspot/fleet_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "hotspot/activity.hpp"
#include "hotspot/errors.hpp"

namespace hotspot {

namespace {

std::string trim_ws(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(trim_ws(tok));
    return out;
}

}  // namespace

std::vector<VehicleSpec> load_vehicles_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vehicles file: " + path);
    std::vector<VehicleSpec> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim_ws(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.rfind("id,", 0) == 0) continue;  // header
        const auto cols = split(t, ',');
        if (cols.size() != 4)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected id,depart_s,route_segs,speed_mps");
        VehicleSpec v;
        v.id = parse_int("id", cols[0]);
        v.depart_s = parse_double("depart_s", cols[1]);
        const double default_speed = parse_double("speed_mps", cols[3]);
        for (const std::string& leg : split(cols[2], ';')) {
            if (leg.empty()) continue;
            const auto at = leg.find('@');
            if (at == std::string::npos) {
                v.route.push_back(parse_int("route_segs", leg));
                v.leg_speed_mps.push_back(default_speed);
            } else {
                v.route.push_back(parse_int("route_segs", leg.substr(0, at)));
                v.leg_speed_mps.push_back(parse_double("route_segs", leg.substr(at + 1)));
            }
        }
        if (v.route.empty())
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty route");
        out.push_back(std::move(v));
    }
    return out;
}

SimConfig SimConfig::load(const std::string& path) {
    SimConfig cfg;
    std::string mode_s = "adaptive";
    parse_flat_config(path, [&](const std::string& key, const std::string& value, int line) {
        if (cfg.app.apply(key, value)) return;
        if (key == "network") cfg.network_path = value;
        else if (key == "vehicles") cfg.vehicles_path = value;
        else if (key == "mode") mode_s = value;
        else if (key == "hotspot") {
            const auto f = split(value, ',');
            if (f.size() != 5)
                throw ParseError(path + ":" + std::to_string(line) +
                                 ": hotspot = seg,d_in_m,v_max,bin_mean,count");
            HotspotSeed h;
            h.segment = parse_int("hotspot", f[0]);
            h.d_in_m = parse_double("hotspot", f[1]);
            h.v_max_mps = parse_double("hotspot", f[2]);
            h.bin_mean_mps = parse_double("hotspot", f[3]);
            h.bin_count = static_cast<int>(parse_int("hotspot", f[4]));
            cfg.hotspot_seeds.push_back(h);
        } else if (key == "incident_segment") {
            cfg.incident.active = true;
            cfg.incident.segment = parse_int(key, value);
        } else if (key == "incident_t0_s") cfg.incident.t0_s = parse_double(key, value);
        else if (key == "incident_clear_s") cfg.incident.clear_s = parse_double(key, value);
        else if (key == "incident_lambda_a") cfg.incident.lambda_a_per_min = parse_double(key, value);
        else if (key == "incident_lambda_d") cfg.incident.lambda_d_per_min = parse_double(key, value);
        else if (key == "incident_mode") {
            const auto m = alert_mode_from_string(value);
            if (!m) throw ParseError("incident_mode must be regular or expedited");
            cfg.incident.mode = *m;
        } else if (key == "incident_route") {
            for (const std::string& s : split(value, ';'))
                if (!s.empty()) cfg.incident.spawn_route.push_back(parse_int(key, s));
        } else if (key == "incident_spawn_speed_mps") {
            cfg.incident.spawn_speed_mps = parse_double(key, value);
        } else {
            throw ParseError(path + ":" + std::to_string(line) + ": unknown key '" + key + "'");
        }
    });
    if (mode_s == "adaptive") cfg.mode = SamplingMode::Adaptive;
    else if (mode_s == "continuous") cfg.mode = SamplingMode::Continuous;
    else throw ParseError("mode must be adaptive or continuous");
    cfg.incident.crawl_mps = cfg.app.incident_crawl_mps;

    namespace fs = std::filesystem;
    if (!cfg.vehicles_path.empty()) {
        fs::path vp(cfg.vehicles_path);
        if (vp.is_relative()) vp = fs::path(path).parent_path() / vp;
        cfg.vehicles = load_vehicles_csv(vp.string());
    }
    if (!cfg.network_path.empty()) {
        fs::path np(cfg.network_path);
        if (np.is_relative()) np = fs::path(path).parent_path() / np;
        cfg.network_path = np.string();
    }
    return cfg;
}

namespace {

/// Traversal orientation of each route leg; traveled distance is measured
/// from the entry node of the leg.
struct LegGeom {
    const RoadSegment* seg = nullptr;
    bool forward = true;  // traverses node_a -> node_b
};

std::vector<LegGeom> orient_route(const VehicleSpec& v, const RoadNetwork& net) {
    std::vector<LegGeom> legs(v.route.size());
    for (std::size_t i = 0; i < v.route.size(); ++i) {
        legs[i].seg = net.find_segment(v.route[i]);
        if (!legs[i].seg)
            throw ValidationError("vehicle " + std::to_string(v.id) + ": unknown segment " +
                                  std::to_string(v.route[i]));
    }
    if (legs.size() == 1) return legs;

    for (std::size_t i = 0; i < legs.size(); ++i) {
        const RoadSegment* cur = legs[i].seg;
        if (i == 0) {
            const RoadSegment* nxt = legs[1].seg;
            const bool b_shared = cur->node_b == nxt->node_a || cur->node_b == nxt->node_b;
            const bool a_shared = cur->node_a == nxt->node_a || cur->node_a == nxt->node_b;
            if (!a_shared && !b_shared)
                throw ValidationError("vehicle " + std::to_string(v.id) +
                                      ": disconnected route at leg 1");
            legs[0].forward = b_shared;  // exit through the shared node
        } else {
            const RoadSegment* prev = legs[i - 1].seg;
            const NodeId entry = legs[i - 1].forward ? prev->node_b : prev->node_a;
            if (cur->node_a == entry) legs[i].forward = true;
            else if (cur->node_b == entry) legs[i].forward = false;
            else
                throw ValidationError("vehicle " + std::to_string(v.id) +
                                      ": disconnected route at leg " + std::to_string(i + 1));
        }
    }
    return legs;
}

NetPosition leg_position(const LegGeom& leg, double traveled_m) {
    const double p = std::clamp(traveled_m, 0.0, leg.seg->length_m);
    return {leg.seg->id, leg.forward ? p : leg.seg->length_m - p};
}

enum EventKind : int {
    kDepart = 0,
    kBoundary = 1,
    kSample = 2,
    kActivity = 3,
    kCacheRefresh = 4,
    kGateRelease = 5,
    kIncidentClear = 6,
};

struct Event {
    double t = 0.0;
    std::int64_t vid = -1;
    int kind = 0;
    std::uint64_t vseq = 0;  // per-vehicle guard; stale events are dropped
    std::uint64_t gseq = 0;  // global tiebreak for heap stability

    bool operator>(const Event& o) const {
        if (t != o.t) return t > o.t;
        if (vid != o.vid) return vid > o.vid;
        if (kind != o.kind) return kind > o.kind;
        return gseq > o.gseq;
    }
};

struct VehicleRt {
    const VehicleSpec* spec = nullptr;
    std::vector<LegGeom> legs;
    std::size_t leg = 0;
    double leg_entry_t = 0.0;
    double leg_entry_traveled = 0.0;
    double leg_speed = 1.0;
    bool departed = false;
    bool arrived = false;
    bool stuck = false;

    SamplerState sampler;
    std::uint64_t sample_seq = 0;
    std::uint64_t boundary_seq = 0;

    VehicleReport rep;
    std::optional<std::pair<double, NetPosition>> last_fix;
};

struct ZoneProbe {
    double distance_m = std::numeric_limits<double>::infinity();
    double d_in_m = 0.0;
    bool in_zone = false;
};

ZoneProbe probe_zone(const NetPosition& pos, const std::vector<HotspotRecord>& hotspots,
                     const RoadNetwork& net, const SamplerParams& params, RouteScratch& scratch) {
    ZoneProbe z;
    const auto nearest = distance_to_nearest_hotspot(pos, hotspots, net, params, scratch);
    if (nearest) {
        z.distance_m = nearest->distance_m;
        z.d_in_m = nearest->record.d_in_m;
        z.in_zone = nearest->distance_m <= nearest->record.d_in_m;
    }
    return z;
}

}  // namespace

void SimConfig::validate(const RoadNetwork& net) const {
    for (const VehicleSpec& v : vehicles) {
        if (v.depart_s < 0)
            throw ValidationError("vehicle " + std::to_string(v.id) + ": negative depart time");
        if (v.route.size() != v.leg_speed_mps.size())
            throw ValidationError("vehicle " + std::to_string(v.id) + ": route/speed mismatch");
        for (double s : v.leg_speed_mps)
            if (!(s > 0))
                throw ValidationError("vehicle " + std::to_string(v.id) + ": non-positive speed");
        orient_route(v, net);  // throws on disconnected routes
    }
    for (const HotspotSeed& h : hotspot_seeds)
        if (!net.find_segment(h.segment))
            throw ValidationError("hotspot seed: unknown segment " + std::to_string(h.segment));
    if (incident.active && !net.find_segment(incident.segment))
        throw ValidationError("incident: unknown segment " + std::to_string(incident.segment));
}

void inject_incident(SimConfig& config, SegmentId segment, double t0_s, double lambda_a_per_min,
                     double lambda_d_per_min, const std::vector<SegmentId>& spawn_route,
                     double spawn_speed_mps) {
    config.incident.active = true;
    config.incident.segment = segment;
    config.incident.t0_s = t0_s;
    config.incident.lambda_a_per_min = lambda_a_per_min;
    config.incident.lambda_d_per_min = lambda_d_per_min;
    config.incident.spawn_route = spawn_route;
    config.incident.spawn_speed_mps = spawn_speed_mps;
}

SimReport run(const SimConfig& config, const RoadNetwork& net, RunOptions opts) {
    config.validate(net);

    AppConfig app = config.app;
    if (config.mode == SamplingMode::Continuous) app.sampler.s_max_s = app.sampler.s_min_s;
    const IncidentSpec& inc = config.incident;
    // Expedited alerting: a single sub-threshold report marks the segment.
    if (inc.active && inc.mode == AlertMode::Expedited) app.engine.k_possible = 1;
    const bool directives_enabled = !inc.active || inc.mode == AlertMode::Expedited;

    SimReport report;
    report.horizon_s = app.horizon_s;
    report.engine = HotspotEngine(app.engine, &net);
    HotspotEngine& engine = report.engine;

    for (const HotspotSeed& h : config.hotspot_seeds)
        engine.seed_hotspot(h.segment, h.v_max_mps, h.bin_mean_mps, h.bin_count, h.d_in_m);

    std::mt19937_64 rng(app.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Spawned incident traffic uses a derived stream so it cannot disturb the
    // fleet's noise draws.
    std::vector<VehicleSpec> spawned;
    if (inc.active && inc.lambda_a_per_min > 0 && !inc.spawn_route.empty()) {
        std::mt19937_64 spawn_rng(app.seed ^ 0x9e3779b97f4a7c15ULL);
        std::exponential_distribution<double> gap(inc.lambda_a_per_min / 60.0);
        std::int64_t next_id = 1000000;
        for (double t = gap(spawn_rng); t < app.horizon_s; t += gap(spawn_rng)) {
            VehicleSpec v;
            v.id = next_id++;
            v.depart_s = t;
            v.route = inc.spawn_route;
            v.leg_speed_mps.assign(v.route.size(), inc.spawn_speed_mps);
            spawned.push_back(std::move(v));
        }
    }

    std::vector<const VehicleSpec*> all_specs;
    for (const VehicleSpec& v : config.vehicles) all_specs.push_back(&v);
    for (const VehicleSpec& v : spawned) all_specs.push_back(&v);

    std::map<std::int64_t, VehicleRt> fleet;
    for (const VehicleSpec* spec : all_specs) {
        if (fleet.count(spec->id))
            throw ValidationError("duplicate vehicle id " + std::to_string(spec->id));
        VehicleRt rt;
        rt.spec = spec;
        rt.legs = orient_route(*spec, net);
        rt.sampler = SamplerState(app.sampler);
        rt.rep.id = spec->id;
        fleet.emplace(spec->id, std::move(rt));
    }

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::uint64_t gseq = 0;
    auto push = [&](double t, std::int64_t vid, int kind, std::uint64_t vseq) {
        if (t <= app.horizon_s) events.push(Event{t, vid, kind, vseq, gseq++});
    };
    auto schedule_sample = [&](VehicleRt& v, double t) { push(t, v.spec->id, kSample, ++v.sample_seq); };
    auto schedule_boundary = [&](VehicleRt& v, double t) {
        push(t, v.spec->id, kBoundary, ++v.boundary_seq);
    };

    for (const VehicleSpec* spec : all_specs) push(spec->depart_s, spec->id, kDepart, 0);

    std::vector<std::int64_t> gate_queue;  // FIFO of vehicles stuck at the incident
    bool incident_cleared = !inc.active;
    if (inc.active) {
        if (inc.clear_s >= 0) push(inc.clear_s, -1, kIncidentClear, 0);
        if (inc.lambda_d_per_min > 0) {
            const double step_s = 60.0 / inc.lambda_d_per_min;
            const double end =
                inc.clear_s >= 0 ? std::min(inc.clear_s, app.horizon_s) : app.horizon_s;
            for (double t = inc.t0_s + step_s; t <= end; t += step_s)
                push(t, -1, kGateRelease, 0);
        }
    }

    RouteScratch scratch;

    auto incident_blocks = [&](SegmentId seg, double t) {
        return inc.active && !incident_cleared && seg == inc.segment && t >= inc.t0_s;
    };

    auto position_of = [&](const VehicleRt& v, double t) -> NetPosition {
        const LegGeom& leg = v.legs[v.leg];
        if (v.stuck) return leg_position(leg, leg.seg->length_m);
        const double traveled = v.leg_entry_traveled + v.leg_speed * (t - v.leg_entry_t);
        return leg_position(leg, traveled);
    };

    // Ground-truth zone crossing, interpolated along the leg being entered.
    auto note_zone_crossing = [&](VehicleRt& v, double t_entry, double span_m, double speed) {
        if (v.rep.true_zone_entry_t) return;
        const auto hotspots = engine.active_hotspots(t_entry);
        if (hotspots.empty()) return;
        const NetPosition at_entry = position_of(v, t_entry);
        const ZoneProbe z0 = probe_zone(at_entry, hotspots, net, app.sampler, scratch);
        if (z0.in_zone) {
            v.rep.true_zone_entry_t = t_entry;
            return;
        }
        if (span_m <= 0 || speed <= 0 || !std::isfinite(z0.distance_m)) return;
        const double t_exit = t_entry + span_m / speed;
        const LegGeom& leg = v.legs[v.leg];
        const NetPosition at_exit = leg_position(leg, v.leg_entry_traveled + span_m);
        const ZoneProbe z1 = probe_zone(at_exit, hotspots, net, app.sampler, scratch);
        if (!z1.in_zone || !std::isfinite(z1.distance_m)) return;
        const double denom = z0.distance_m - z1.distance_m;
        if (denom <= 0) return;
        const double frac = std::clamp((z0.distance_m - z1.d_in_m) / denom, 0.0, 1.0);
        v.rep.true_zone_entry_t = t_entry + frac * (t_exit - t_entry);
    };

    auto enter_leg = [&](VehicleRt& v, std::size_t leg_idx, double t, double traveled0) {
        v.leg = leg_idx;
        v.leg_entry_t = t;
        v.leg_entry_traveled = traveled0;
        v.stuck = false;
        const LegGeom& leg = v.legs[leg_idx];
        double speed = v.spec->leg_speed_mps[leg_idx];
        if (app.noise_sd_frac > 0) {
            speed += gauss(rng) * app.noise_sd_frac * speed;
            speed = std::max(speed, 0.5);
        }
        if (incident_blocks(leg.seg->id, t)) speed = std::min(speed, inc.crawl_mps);
        v.leg_speed = speed;
        note_zone_crossing(v, t, leg.seg->length_m - traveled0, speed);
        schedule_boundary(v, t + (leg.seg->length_m - traveled0) / speed);
    };

    auto start_sampling = [&](VehicleRt& v, double t) {
        engine.advance(t);
        v.sampler.receive_hotspots(engine.active_hotspots(t), t);
        v.sampler.start_driving(t, position_of(v, t), net, scratch);
        schedule_sample(v, t + v.sampler.current_interval_s());
        push(t + app.sampler.poll_interval_s, v.spec->id, kCacheRefresh, 0);
    };

    auto push_expedite = [&](SegmentId seg, double t) {
        for (auto& [vid, v] : fleet) {
            if (!v.departed || v.arrived || !v.sampler.driving()) continue;
            bool approaching = false;
            for (std::size_t i = v.leg; i < v.legs.size(); ++i)
                if (v.legs[i].seg->id == seg) {
                    approaching = true;
                    break;
                }
            if (!approaching) continue;
            const bool was = v.sampler.expedited(t);
            v.sampler.receive_expedite(t);
            if (!was)
                schedule_sample(v, std::max(t, v.sampler.last_sample_t() + app.sampler.s_min_s));
        }
    };

    // Server side of one uploaded fix: snap, pair with the previous fix,
    // derive a speed, feed the engine.
    auto upload_fix = [&](VehicleRt& v, double t, const NetPosition& true_pos) {
        const GeoPoint fix = net.point_at(true_pos);
        const auto snap = net.snap(fix, app.max_snap_m);
        if (!snap) {
            ++report.rejected_snap;
            return;
        }
        const NetPosition snapped{snap->segment, snap->offset_m};
        if (v.last_fix) {
            const double dt = t - v.last_fix->first;
            if (dt > 0 && dt <= app.gap_max_s) {
                const auto dist = net.road_distance(v.last_fix->second, snapped, scratch);
                if (dist) {
                    ++report.pairs_formed;
                    const double speed = *dist / dt;
                    if (engine.ingest(snap->segment, t, speed) == IngestStatus::Accepted) {
                        ++report.ingested;
                        if (directives_enabled &&
                            engine.find_state(snap->segment)->state == SegState::PossibleHotspot)
                            push_expedite(snap->segment, t);
                    }
                }
            } else if (dt > app.gap_max_s) {
                ++report.skipped_gap;
            }
        }
        v.last_fix = {t, snapped};
    };

    const double act_window = app.activity_window_s;

    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        ++report.events_processed;

        if (ev.vid < 0) {
            if (ev.kind == kIncidentClear) {
                incident_cleared = true;
                for (auto& [vid, v] : fleet) {
                    if (v.stuck) {
                        v.stuck = false;
                        if (v.leg + 1 < v.legs.size()) enter_leg(v, v.leg + 1, ev.t, 0.0);
                        else v.arrived = true;
                    } else if (v.departed && !v.arrived &&
                               v.legs[v.leg].seg->id == inc.segment && ev.t >= inc.t0_s) {
                        // Crawling mid-segment: resume normal speed from here.
                        const double traveled =
                            v.leg_entry_traveled + v.leg_speed * (ev.t - v.leg_entry_t);
                        if (traveled < v.legs[v.leg].seg->length_m)
                            enter_leg(v, v.leg, ev.t, traveled);
                    }
                }
                gate_queue.clear();
            } else if (ev.kind == kGateRelease) {
                if (!gate_queue.empty()) {
                    const std::int64_t vid = gate_queue.front();
                    gate_queue.erase(gate_queue.begin());
                    VehicleRt& v = fleet.at(vid);
                    if (v.stuck) {
                        v.stuck = false;
                        if (v.leg + 1 < v.legs.size()) enter_leg(v, v.leg + 1, ev.t, 0.0);
                        else v.arrived = true;
                    }
                }
            }
            continue;
        }

        VehicleRt& v = fleet.at(ev.vid);

        switch (ev.kind) {
            case kDepart: {
                v.departed = true;
                enter_leg(v, 0, ev.t, v.spec->start_offset_m);
                push(ev.t, ev.vid, kActivity, 0);
                break;
            }
            case kBoundary: {
                if (ev.vseq != v.boundary_seq) break;  // superseded
                if (!v.departed || v.arrived || v.stuck) break;
                const LegGeom& leg = v.legs[v.leg];
                if (incident_blocks(leg.seg->id, ev.t)) {
                    v.stuck = true;
                    gate_queue.push_back(ev.vid);
                    break;
                }
                if (v.leg + 1 < v.legs.size()) enter_leg(v, v.leg + 1, ev.t, 0.0);
                else v.arrived = true;
                break;
            }
            case kActivity: {
                if (!v.departed) break;
                SensorSnapshot snap;
                snap.window_s = act_window;
                const bool truly_driving = !v.arrived;
                if (truly_driving) {
                    snap.known_wifi_visible = false;
                    snap.gsm_towers_in_window = 5;
                    for (int i = 0; i < 8; ++i)
                        snap.accel_samples.push_back({0.0, 0.0, 9.81 + ((i & 1) ? 1.2 : -1.2)});
                } else {
                    snap.known_wifi_visible = true;  // parked near known WiFi
                }
                const ActivityVerdict verdict = classify_activity(snap, app.activity);
                if (verdict.driving && !v.sampler.driving()) {
                    start_sampling(v, ev.t);
                } else if (!verdict.driving && v.sampler.driving()) {
                    v.sampler.set_driving(false);
                    ++v.sample_seq;  // kill the pending sample event
                }
                if (!v.arrived || v.sampler.driving())
                    push(ev.t + act_window, ev.vid, kActivity, 0);
                break;
            }
            case kSample: {
                if (ev.vseq != v.sample_seq) break;  // superseded
                if (!v.sampler.driving()) break;
                const NetPosition pos = position_of(v, ev.t);
                const auto tick = v.sampler.tick(ev.t, pos, net, scratch);
                if (!tick.sample_now) {
                    schedule_sample(v, v.sampler.last_sample_t() + v.sampler.current_interval_s());
                    break;
                }
                ++v.rep.samples;
                ++report.samples_emitted;
                v.rep.bytes += app.bytes_per_sample;
                const ZoneProbe z =
                    probe_zone(pos, v.sampler.hotspot_cache(), net, app.sampler, scratch);
                v.rep.joules += z.in_zone ? app.e_in_j : app.e_out_j;
                if (opts.record_intervals) v.rep.emitted_intervals.push_back(tick.next_interval_s);
                if (z.in_zone && !v.rep.first_in_zone_sample_t) v.rep.first_in_zone_sample_t = ev.t;
                upload_fix(v, ev.t, pos);
                schedule_sample(v, ev.t + tick.next_interval_s);
                break;
            }
            case kCacheRefresh: {
                if (!v.sampler.driving()) break;
                engine.advance(ev.t);
                v.sampler.receive_hotspots(engine.active_hotspots(ev.t), ev.t);
                push(ev.t + app.sampler.poll_interval_s, ev.vid, kCacheRefresh, 0);
                break;
            }
            default: break;
        }
    }

    engine.advance(app.horizon_s);

    for (auto& [vid, v] : fleet) {
        if (v.rep.true_zone_entry_t && v.rep.first_in_zone_sample_t)
            v.rep.zone_entry_delay_s = *v.rep.first_in_zone_sample_t - *v.rep.true_zone_entry_t;
        report.total_joules += v.rep.joules;
        report.total_bytes += v.rep.bytes;
        report.per_vehicle.push_back(std::move(v.rep));
    }
    return report;
}

CompareResult compare_modes(const SimConfig& config, const RoadNetwork& net, RunOptions opts) {
    SimConfig cont = config;
    cont.mode = SamplingMode::Continuous;
    SimConfig adap = config;
    adap.mode = SamplingMode::Adaptive;

    CompareResult out;
    out.continuous = run(cont, net, opts);
    out.adaptive = run(adap, net, opts);

    const double adap_samples = std::max<double>(1.0, out.adaptive.samples_emitted);
    out.sample_ratio = static_cast<double>(out.continuous.samples_emitted) / adap_samples;
    out.byte_ratio = out.continuous.total_bytes / std::max(1.0, out.adaptive.total_bytes);
    out.energy_ratio = out.continuous.total_joules / std::max(1e-12, out.adaptive.total_joules);

    double delta = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < out.adaptive.per_vehicle.size(); ++i) {
        const auto& a = out.adaptive.per_vehicle[i];
        const auto& c = out.continuous.per_vehicle[i];
        if (a.zone_entry_delay_s && c.zone_entry_delay_s) {
            delta += *a.zone_entry_delay_s - *c.zone_entry_delay_s;
            ++n;
        }
    }
    if (n > 0) out.delay_delta_s = delta / n;
    return out;
}

namespace {

void fmt_g(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf;
}

}  // namespace

void SimReport::write_csv(const std::string& dir, const RoadNetwork& net) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    (void)net;

    {
        std::ofstream f(fs::path(dir) / "per_vehicle.csv");
        f << "id,samples,joules,bytes,zone_entry_delay_s\n";
        for (const VehicleReport& v : per_vehicle) {
            f << v.id << ',' << v.samples << ',';
            fmt_g(f, v.joules);
            f << ',';
            fmt_g(f, v.bytes);
            f << ',';
            if (v.zone_entry_delay_s) fmt_g(f, *v.zone_entry_delay_s);
            f << '\n';
        }
    }
    {
        std::ofstream f(fs::path(dir) / "per_segment.csv");
        f << "segment_id,v_max_mps,state,level,samples\n";
        for (const auto& [seg, st] : engine.states()) {
            std::uint64_t n = 0;
            for (const auto& b : st.bins) n += b.stats.count();
            f << seg << ',';
            fmt_g(f, st.v_max);
            f << ',' << to_string(st.state) << ',' << to_string(st.level) << ',' << n << '\n';
        }
    }
    {
        std::ofstream f(fs::path(dir) / "hotspots.csv");
        f << "segment_id,level,bin,lat,lon,d_in_m\n";
        for (const HotspotRecord& h : engine.active_hotspots(horizon_s)) {
            f << h.segment << ',' << to_string(h.level) << ',' << h.bin << ',';
            fmt_g(f, h.anchor.lat);
            f << ',';
            fmt_g(f, h.anchor.lon);
            f << ',';
            fmt_g(f, h.d_in_m);
            f << '\n';
        }
    }
    {
        std::ofstream f(fs::path(dir) / "global.csv");
        f << "key,value\n";
        f << "samples_emitted," << samples_emitted << '\n';
        f << "pairs_formed," << pairs_formed << '\n';
        f << "ingested," << ingested << '\n';
        f << "rejected_speed_cap," << engine.rejected_speed_cap() << '\n';
        f << "rejected_snap," << rejected_snap << '\n';
        f << "skipped_gap," << skipped_gap << '\n';
        f << "events_processed," << events_processed << '\n';
        f << "total_joules,";
        fmt_g(f, total_joules);
        f << '\n';
        f << "total_bytes,";
        fmt_g(f, total_bytes);
        f << '\n';
    }
}

}  // namespace hotspot
