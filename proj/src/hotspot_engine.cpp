#include "hotspot/hotspot_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hotspot/errors.hpp"

namespace hotspot {

const char* to_string(SegState s) {
    switch (s) {
        case SegState::Uncongested: return "uncongested";
        case SegState::PossibleHotspot: return "possible";
        case SegState::Hotspot: return "hotspot";
    }
    return "?";
}

const char* to_string(CongestionLevel l) {
    switch (l) {
        case CongestionLevel::None: return "none";
        case CongestionLevel::Low: return "low";
        case CongestionLevel::Medium: return "medium";
        case CongestionLevel::High: return "high";
    }
    return "?";
}

namespace {

SegState state_from_string(const std::string& s) {
    if (s == "uncongested") return SegState::Uncongested;
    if (s == "possible") return SegState::PossibleHotspot;
    if (s == "hotspot") return SegState::Hotspot;
    throw ParseError("bad state token: " + s);
}

CongestionLevel level_from_string(const std::string& s) {
    if (s == "none") return CongestionLevel::None;
    if (s == "low") return CongestionLevel::Low;
    if (s == "medium") return CongestionLevel::Medium;
    if (s == "high") return CongestionLevel::High;
    throw ParseError("bad level token: " + s);
}

void fmt_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

IngestStatus HotspotEngine::ingest(SegmentId seg, double t, double speed_mps) {
    if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps)) return IngestStatus::RejectedInvalid;
    if (speed_mps > params_.speed_cap_mps) {
        ++rejected_speed_cap_;
        return IngestStatus::RejectedSpeedCap;
    }

    SegmentCongestionState& st = states_[seg];
    // Reference speed first, so every bin mean stays <= v_max.
    st.v_max = std::max(st.v_max, speed_mps);

    BinStats& bs = st.bins[time_bin(t)];
    bs.stats.add(speed_mps);
    bs.last_update = t;

    // Ring ordered by (t, speed) so same-timestamp arrival order cannot change
    // which samples survive the W cut.
    RecentSample rs{t, speed_mps};
    auto it = st.recent.end();
    while (it != st.recent.begin()) {
        auto prev = std::prev(it);
        if (prev->t < rs.t || (prev->t == rs.t && prev->speed <= rs.speed)) break;
        it = prev;
    }
    st.recent.insert(it, rs);
    while (st.recent.size() > static_cast<std::size_t>(params_.recent_window))
        st.recent.pop_front();

    ++st.fresh_samples;
    ++ingested_;

    evaluate(seg, st, t);
    return IngestStatus::Accepted;
}

void HotspotEngine::note_transition(SegmentId seg, SegmentCongestionState& st, SegState to,
                                    double now) {
    if (record_transitions_) transitions_.push_back({seg, st.state, to, now});
    st.state = to;
    st.state_entered_t = now;
    st.fresh_samples = 0;
}

std::optional<Transition> HotspotEngine::step_state_machine(SegmentId seg, double now) {
    auto it = states_.find(seg);
    if (it == states_.end()) return std::nullopt;
    return evaluate(seg, it->second, now);
}

void HotspotEngine::advance(double now) {
    for (auto& [seg, st] : states_)
        if (st.state == SegState::PossibleHotspot) evaluate(seg, st, now);
}

std::optional<Transition> HotspotEngine::evaluate(SegmentId seg, SegmentCongestionState& st,
                                                  double now) {
    const SegState before = st.state;
    const Thresholds th = Thresholds::from(st.v_max, params_.tau, params_.ref_divisor);
    const int bin = time_bin(now);
    const BinStats& bs = st.bins[bin];

    // Phase 1: window expiry. An unconfirmed possible hotspot lapses.
    if (st.state == SegState::PossibleHotspot && now - st.state_entered_t > params_.t_w_s)
        note_transition(seg, st, SegState::Uncongested, now);

    // Phase 2: at most one rule transition.
    switch (st.state) {
        case SegState::Uncongested: {
            int lows = 0;
            for (const RecentSample& r : st.recent)
                if (r.t >= now - params_.t_w_s && r.speed <= th.hot) ++lows;
            if (st.v_max > 0.0 && lows >= params_.k_possible)
                note_transition(seg, st, SegState::PossibleHotspot, now);
            break;
        }
        case SegState::PossibleHotspot: {
            if (bs.stats.count() >= static_cast<std::uint64_t>(params_.n_confirm) &&
                separate_slow_roads(seg, bin)) {
                note_transition(seg, st, SegState::Hotspot, now);
                st.level = CongestionLevel::High;
            }
            break;
        }
        case SegState::Hotspot: {
            if (st.fresh_samples >= static_cast<std::uint64_t>(params_.n_confirm) &&
                bs.stats.count() > 0 && bs.stats.mean() > th.low) {
                note_transition(seg, st, SegState::Uncongested, now);
                st.level = CongestionLevel::None;
            } else {
                // Keep a non-none level while congested even if the current
                // bin is still thin on data.
                const Classification c = classify(seg, bin);
                st.level = std::max(c.level, CongestionLevel::Low);
            }
            break;
        }
    }

    if (st.state != before) return Transition{seg, before, st.state, now};
    return std::nullopt;
}

Classification HotspotEngine::classify(SegmentId seg, int bin) const {
    const SegmentCongestionState* st = find_state(seg);
    if (!st) return {CongestionLevel::None, true};
    const BinStats& bs = st->bins[bin];
    if (bs.stats.count() < static_cast<std::uint64_t>(params_.min_samples))
        return {CongestionLevel::None, true};
    const Thresholds th = Thresholds::from(st->v_max, params_.tau, params_.ref_divisor);
    const double mean = bs.stats.mean();
    if (mean <= th.hot) return {CongestionLevel::High, false};
    if (mean <= th.med) return {CongestionLevel::Medium, false};
    if (mean <= th.low) return {CongestionLevel::Low, false};
    return {CongestionLevel::None, false};
}

bool HotspotEngine::separate_slow_roads(SegmentId seg, int bin) const {
    const SegmentCongestionState* st = find_state(seg);
    if (!st) return false;
    const BinStats& bs = st->bins[bin];
    if (bs.stats.count() < static_cast<std::uint64_t>(params_.min_samples)) return false;
    if (classify(seg, bin).level != CongestionLevel::High) return false;
    const double mean = bs.stats.mean();
    const double nd = mean > 0.0 ? bs.stats.stddev() / mean : 0.0;
    return nd >= params_.nd_min || st->v_max >= 2.0 * mean;
}

Thresholds HotspotEngine::thresholds_for(SegmentId seg) const {
    const SegmentCongestionState* st = find_state(seg);
    return Thresholds::from(st ? st->v_max : 0.0, params_.tau, params_.ref_divisor);
}

const SegmentCongestionState* HotspotEngine::find_state(SegmentId seg) const {
    auto it = states_.find(seg);
    return it == states_.end() ? nullptr : &it->second;
}

double HotspotEngine::d_in_for(SegmentId seg) const {
    auto it = d_in_override_.find(seg);
    return it == d_in_override_.end() ? params_.default_d_in_m : it->second;
}

std::optional<double> bin_mean_correlation(const SegmentCongestionState& a,
                                           const SegmentCongestionState& b, int min_samples) {
    std::vector<double> xs, ys;
    for (int bin = 0; bin < kBinsPerDay; ++bin) {
        const auto& sa = a.bins[bin].stats;
        const auto& sb = b.bins[bin].stats;
        if (sa.count() >= static_cast<std::uint64_t>(min_samples) &&
            sb.count() >= static_cast<std::uint64_t>(min_samples)) {
            xs.push_back(sa.mean());
            ys.push_back(sb.mean());
        }
    }
    if (xs.size() < 3) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<HotspotRecord> HotspotEngine::active_hotspots(double now) const {
    std::vector<SegmentId> hot;
    for (const auto& [seg, st] : states_)
        if (st.state == SegState::Hotspot) hot.push_back(seg);
    if (hot.empty()) return {};

    // Collapse adjacent, correlated hotspots to one representative each.
    std::vector<std::size_t> parent(hot.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    if (net_) {
        for (std::size_t i = 0; i < hot.size(); ++i) {
            for (SegmentId nb : net_->adjacent_segments(hot[i])) {
                const auto it = std::lower_bound(hot.begin(), hot.end(), nb);
                if (it == hot.end() || *it != nb) continue;
                const std::size_t j = static_cast<std::size_t>(it - hot.begin());
                if (find(i) == find(j)) continue;
                const auto corr = bin_mean_correlation(*find_state(hot[i]), *find_state(nb),
                                                       params_.min_samples);
                if (corr && *corr >= params_.corr_min) parent[find(j)] = find(i);
            }
        }
    }

    std::map<std::size_t, SegmentId> rep;  // component -> lowest segment id
    for (std::size_t i = 0; i < hot.size(); ++i) {
        const std::size_t root = find(i);
        auto [it, inserted] = rep.emplace(root, hot[i]);
        if (!inserted) it->second = std::min(it->second, hot[i]);
    }

    std::vector<HotspotRecord> out;
    for (const auto& [root, seg] : rep) {
        const SegmentCongestionState& st = *find_state(seg);
        HotspotRecord r;
        r.segment = seg;
        r.level = st.level;
        r.bin = time_bin(now);
        if (net_) {
            if (const RoadSegment* rs = net_->find_segment(seg)) r.anchor = rs->midpoint();
        }
        r.d_in_m = d_in_for(seg);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const HotspotRecord& a, const HotspotRecord& b) { return a.segment < b.segment; });
    return out;
}

std::vector<SegmentId> HotspotEngine::expedited_segments() const {
    std::vector<SegmentId> out;
    for (const auto& [seg, st] : states_)
        if (st.state == SegState::PossibleHotspot) out.push_back(seg);
    return out;
}

std::optional<QueryResult> HotspotEngine::query(const GeoPoint& p, double t,
                                                double max_snap_m) const {
    if (!net_) return std::nullopt;
    const auto snap = net_->snap(p, max_snap_m);
    if (!snap) return std::nullopt;

    QueryResult qr;
    qr.segment = snap->segment;
    const Classification c = classify(snap->segment, time_bin(t));
    qr.level = c.level;
    qr.insufficient_data = c.insufficient_data;
    const SegmentCongestionState* st = find_state(snap->segment);
    const BinStats* bs = st ? &st->bins[time_bin(t)] : nullptr;
    qr.mean_speed_mps = bs && bs->stats.count() > 0 ? bs->stats.mean() : 0.0;
    const double eps = 0.1;
    qr.crossing_time_s =
        net_->segment(snap->segment).length_m / std::max(qr.mean_speed_mps, eps);
    return qr;
}

void HotspotEngine::seed_hotspot(SegmentId seg, double v_max, double bin_mean, int bin_count,
                                 std::optional<double> d_in_m) {
    SegmentCongestionState& st = states_[seg];
    st.v_max = std::max(st.v_max, v_max);
    for (int bin = 0; bin < kBinsPerDay; ++bin) {
        st.bins[bin].stats.set_raw(static_cast<std::uint64_t>(bin_count), bin_mean, 0.0);
        st.bins[bin].last_update = 0.0;
    }
    st.state = SegState::Hotspot;
    st.level = CongestionLevel::High;
    st.state_entered_t = 0.0;
    st.fresh_samples = 0;
    if (d_in_m) d_in_override_[seg] = *d_in_m;
}

void HotspotEngine::dump(std::ostream& out) const {
    out << "hotspot-engine-checkpoint v1\n";
    out << "params ";
    fmt_double(out, params_.tau);
    out << ' ';
    fmt_double(out, params_.ref_divisor);
    out << ' ' << params_.min_samples << ' ' << params_.n_confirm << ' ' << params_.k_possible
        << ' ' << params_.recent_window << ' ';
    fmt_double(out, params_.t_w_s);
    out << ' ';
    fmt_double(out, params_.nd_min);
    out << ' ';
    fmt_double(out, params_.speed_cap_mps);
    out << ' ';
    fmt_double(out, params_.default_d_in_m);
    out << ' ';
    fmt_double(out, params_.corr_min);
    out << '\n';
    out << "counters " << ingested_ << ' ' << rejected_speed_cap_ << '\n';
    out << "overrides " << d_in_override_.size() << '\n';
    for (const auto& [seg, v] : d_in_override_) {
        out << seg << ' ';
        fmt_double(out, v);
        out << '\n';
    }
    out << "segments " << states_.size() << '\n';
    for (const auto& [seg, st] : states_) {
        out << "seg " << seg << ' ';
        fmt_double(out, st.v_max);
        out << ' ' << to_string(st.state) << ' ' << to_string(st.level) << ' ';
        fmt_double(out, st.state_entered_t);
        out << ' ' << st.fresh_samples << '\n';
        int nonempty = 0;
        for (const auto& b : st.bins)
            if (b.stats.count() > 0) ++nonempty;
        out << "bins " << nonempty << '\n';
        for (int bin = 0; bin < kBinsPerDay; ++bin) {
            const BinStats& b = st.bins[bin];
            if (b.stats.count() == 0) continue;
            out << bin << ' ' << b.stats.count() << ' ';
            fmt_double(out, b.stats.mean());
            out << ' ';
            fmt_double(out, b.stats.m2());
            out << ' ';
            fmt_double(out, b.last_update);
            out << '\n';
        }
        out << "ring " << st.recent.size() << '\n';
        for (const RecentSample& r : st.recent) {
            fmt_double(out, r.t);
            out << ' ';
            fmt_double(out, r.speed);
            out << '\n';
        }
    }
    out << "end\n";
}

HotspotEngine HotspotEngine::load(std::istream& in, const RoadNetwork* net) {
    std::string header;
    std::getline(in, header);
    if (header != "hotspot-engine-checkpoint v1")
        throw ParseError("unrecognized checkpoint header: " + header);

    HotspotEngine eng({}, net);
    std::string tok;
    in >> tok;
    if (tok != "params") throw ParseError("checkpoint: expected params");
    in >> eng.params_.tau >> eng.params_.ref_divisor >> eng.params_.min_samples >>
        eng.params_.n_confirm >> eng.params_.k_possible >> eng.params_.recent_window >>
        eng.params_.t_w_s >> eng.params_.nd_min >> eng.params_.speed_cap_mps >>
        eng.params_.default_d_in_m >> eng.params_.corr_min;
    in >> tok >> eng.ingested_ >> eng.rejected_speed_cap_;
    if (tok != "counters") throw ParseError("checkpoint: expected counters");
    std::size_t n_over = 0;
    in >> tok >> n_over;
    if (tok != "overrides") throw ParseError("checkpoint: expected overrides");
    for (std::size_t i = 0; i < n_over; ++i) {
        SegmentId seg;
        double v;
        in >> seg >> v;
        eng.d_in_override_[seg] = v;
    }
    std::size_t n_segs = 0;
    in >> tok >> n_segs;
    if (tok != "segments") throw ParseError("checkpoint: expected segments");
    for (std::size_t i = 0; i < n_segs; ++i) {
        SegmentId seg;
        std::string state_s, level_s;
        in >> tok >> seg;
        if (tok != "seg") throw ParseError("checkpoint: expected seg");
        SegmentCongestionState st;
        in >> st.v_max >> state_s >> level_s >> st.state_entered_t >> st.fresh_samples;
        st.state = state_from_string(state_s);
        st.level = level_from_string(level_s);
        std::size_t n_bins = 0;
        in >> tok >> n_bins;
        if (tok != "bins") throw ParseError("checkpoint: expected bins");
        for (std::size_t k = 0; k < n_bins; ++k) {
            int bin;
            std::uint64_t count;
            double mean, m2, last;
            in >> bin >> count >> mean >> m2 >> last;
            if (bin < 0 || bin >= kBinsPerDay) throw ParseError("checkpoint: bad bin index");
            st.bins[bin].stats.set_raw(count, mean, m2);
            st.bins[bin].last_update = last;
        }
        std::size_t n_ring = 0;
        in >> tok >> n_ring;
        if (tok != "ring") throw ParseError("checkpoint: expected ring");
        for (std::size_t k = 0; k < n_ring; ++k) {
            RecentSample r;
            in >> r.t >> r.speed;
            st.recent.push_back(r);
        }
        eng.states_.emplace(seg, std::move(st));
    }
    in >> tok;
    if (tok != "end") throw ParseError("checkpoint: missing end marker");
    return eng;
}

}  // namespace hotspot
