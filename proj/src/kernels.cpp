#include "hotspot/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace hotspot {

std::vector<std::optional<SnapResult>> snap_batch(const std::vector<GeoPoint>& points,
                                                  const RoadNetwork& net, double max_snap_m,
                                                  Exec exec) {
    std::vector<std::optional<SnapResult>> out(points.size());
    const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n; ++i) out[i] = net.snap(points[i], max_snap_m);
    return out;
}

// Grants ingest_batch access to per-segment state so the parallel path can
// skip the shared counters and aggregate them afterwards.
struct EngineBatchAccess {
    static SegmentCongestionState& state(HotspotEngine& e, SegmentId seg) {
        return e.states_[seg];
    }
    static IngestStatus ingest(HotspotEngine& e, SegmentId seg, double t, double speed) {
        return e.ingest(seg, t, speed);
    }
    static void add_counters(HotspotEngine& e, std::uint64_t ingested, std::uint64_t rejected) {
        e.ingested_ += ingested;
        e.rejected_speed_cap_ += rejected;
    }
    static bool recording(const HotspotEngine& e) { return e.record_transitions_; }
    static IngestStatus ingest_no_counters(HotspotEngine& e, SegmentId seg,
                                           SegmentCongestionState& st, double t, double speed);
};

IngestStatus EngineBatchAccess::ingest_no_counters(HotspotEngine& e, SegmentId seg,
                                                   SegmentCongestionState& st, double t,
                                                   double speed) {
    if (!(speed >= 0.0) || !std::isfinite(speed)) return IngestStatus::RejectedInvalid;
    if (speed > e.params_.speed_cap_mps) return IngestStatus::RejectedSpeedCap;

    st.v_max = std::max(st.v_max, speed);
    BinStats& bs = st.bins[time_bin(t)];
    bs.stats.add(speed);
    bs.last_update = t;

    RecentSample rs{t, speed};
    auto it = st.recent.end();
    while (it != st.recent.begin()) {
        auto prev = std::prev(it);
        if (prev->t < rs.t || (prev->t == rs.t && prev->speed <= rs.speed)) break;
        it = prev;
    }
    st.recent.insert(it, rs);
    while (st.recent.size() > static_cast<std::size_t>(e.params_.recent_window))
        st.recent.pop_front();

    ++st.fresh_samples;
    e.evaluate(seg, st, t);
    return IngestStatus::Accepted;
}

IngestBatchResult ingest_batch(HotspotEngine& engine, const std::vector<AttributedSample>& samples,
                               Exec exec) {
    IngestBatchResult res;

    if (exec == Exec::Serial) {
        for (const AttributedSample& s : samples) {
            switch (EngineBatchAccess::ingest(engine, s.segment, s.t, s.speed_mps)) {
                case IngestStatus::Accepted: ++res.accepted; break;
                case IngestStatus::RejectedSpeedCap: ++res.rejected_speed_cap; break;
                case IngestStatus::RejectedInvalid: ++res.rejected_invalid; break;
            }
        }
        return res;
    }

    if (EngineBatchAccess::recording(engine))
        throw std::logic_error("ingest_batch: parallel mode cannot record transitions");

    // Shard by segment, preserving per-segment input order.
    std::vector<std::pair<SegmentId, std::uint32_t>> order(samples.size());
    for (std::uint32_t i = 0; i < samples.size(); ++i) order[i] = {samples[i].segment, i};
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::size_t> group_start;
    for (std::size_t i = 0; i < order.size(); ++i)
        if (i == 0 || order[i].first != order[i - 1].first) group_start.push_back(i);
    group_start.push_back(order.size());

    // Touch each segment's state once, serially, so the map shape is fixed
    // before threads mutate the values.
    for (std::size_t g = 0; g + 1 < group_start.size(); ++g)
        EngineBatchAccess::state(engine, order[group_start[g]].first);

    const std::int64_t n_groups = static_cast<std::int64_t>(group_start.size()) - 1;
    std::uint64_t total_acc = 0, total_cap = 0, total_inv = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total_acc, total_cap, total_inv)
    for (std::int64_t g = 0; g < n_groups; ++g) {
        const SegmentId seg = order[group_start[g]].first;
        SegmentCongestionState& st = EngineBatchAccess::state(engine, seg);
        for (std::size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
            const AttributedSample& s = samples[order[k].second];
            switch (EngineBatchAccess::ingest_no_counters(engine, seg, st, s.t, s.speed_mps)) {
                case IngestStatus::Accepted: ++total_acc; break;
                case IngestStatus::RejectedSpeedCap: ++total_cap; break;
                case IngestStatus::RejectedInvalid: ++total_inv; break;
            }
        }
    }
    res.accepted = total_acc;
    res.rejected_speed_cap = total_cap;
    res.rejected_invalid = total_inv;
    EngineBatchAccess::add_counters(engine, res.accepted, res.rejected_speed_cap);
    return res;
}

}  // namespace hotspot
