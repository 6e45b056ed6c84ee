#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/geo.hpp"
#include "hotspot/road_network.hpp"
#include "hotspot/welford.hpp"

namespace hotspot {

inline constexpr int kBinsPerDay = 48;
inline constexpr double kBinSeconds = 1800.0;

/// Half-hour slot of the local day for a timestamp in seconds.
inline int time_bin(double t_s) {
    const double day = std::fmod(t_s, 86400.0);
    const double pos = day < 0 ? day + 86400.0 : day;
    const int bin = static_cast<int>(pos / kBinSeconds);
    return bin >= kBinsPerDay ? kBinsPerDay - 1 : bin;
}

enum class SegState { Uncongested, PossibleHotspot, Hotspot };
enum class CongestionLevel { None, Low, Medium, High };

const char* to_string(SegState s);
const char* to_string(CongestionLevel l);

/// Congestion thresholds derived from a segment's reference (maximum
/// observed) speed: hot < med < low, all fractions of v_max / divisor.
struct Thresholds {
    double hot = 0.0;
    double med = 0.0;
    double low = 0.0;

    static Thresholds from(double v_max, double tau, double divisor) {
        const double base = v_max / divisor;
        return {tau * base, 2.0 * tau * base, 3.0 * tau * base};
    }
};

struct EngineParams {
    double tau = 0.25;              // hotspot fraction of the reference speed
    double ref_divisor = 2.0;       // reference = v_max / ref_divisor
    int min_samples = 5;            // data floor for classification
    int n_confirm = 30;             // samples to confirm or release a hotspot
    int k_possible = 3;             // low samples that trigger PossibleHotspot
    int recent_window = 10;         // W, ring size of recent samples
    double t_w_s = 600.0;           // recency window / PossibleHotspot expiry
    double nd_min = 0.5;            // normalized-deviation floor for genuine hotspots
    double speed_cap_mps = 70.0;    // GPS glitch rejection
    double default_d_in_m = 2000.0; // congestion spread around a hotspot
    double corr_min = 0.9;          // adjacent-segment correlation collapse
};

struct BinStats {
    RunningStats stats;
    double last_update = 0.0;
};

struct RecentSample {
    double t = 0.0;
    double speed = 0.0;
};

struct SegmentCongestionState {
    double v_max = 0.0;
    std::array<BinStats, kBinsPerDay> bins;
    SegState state = SegState::Uncongested;
    CongestionLevel level = CongestionLevel::None;
    std::deque<RecentSample> recent;       // last W samples, ordered by (t, speed)
    double state_entered_t = 0.0;
    std::uint64_t fresh_samples = 0;       // accepted samples since last state change
};

struct HotspotRecord {
    SegmentId segment = 0;
    CongestionLevel level = CongestionLevel::None;
    int bin = 0;
    GeoPoint anchor;
    double d_in_m = 0.0;
};

struct Transition {
    SegmentId segment = 0;
    SegState from = SegState::Uncongested;
    SegState to = SegState::Uncongested;
    double t = 0.0;
};

struct Classification {
    CongestionLevel level = CongestionLevel::None;
    bool insufficient_data = false;
};

struct QueryResult {
    SegmentId segment = 0;
    CongestionLevel level = CongestionLevel::None;
    double mean_speed_mps = 0.0;
    double crossing_time_s = 0.0;
    bool insufficient_data = false;
};

enum class IngestStatus { Accepted, RejectedSpeedCap, RejectedInvalid };

/// Per-segment congestion bookkeeping and the
/// uncongested / possible-hotspot / hotspot state machine.
///
/// Ingestion may run in parallel across segments but must stay serialized per
/// segment id; see ingest_batch in kernels.hpp. Reads between updates see a
/// consistent snapshot.
class HotspotEngine {
  public:
    explicit HotspotEngine(EngineParams params = {}, const RoadNetwork* net = nullptr)
        : params_(params), net_(net) {}

    const EngineParams& params() const { return params_; }
    void attach_network(const RoadNetwork* net) { net_ = net; }

    IngestStatus ingest(SegmentId seg, double t, double speed_mps);

    /// Applies any due state transition for one segment (at most one rule
    /// transition per call, preceded by window expiry).
    std::optional<Transition> step_state_machine(SegmentId seg, double now);

    /// Applies time-driven transitions for every tracked segment.
    void advance(double now);

    Classification classify(SegmentId seg, int bin) const;
    bool separate_slow_roads(SegmentId seg, int bin) const;
    Thresholds thresholds_for(SegmentId seg) const;

    std::vector<HotspotRecord> active_hotspots(double now) const;

    /// Segments currently in PossibleHotspot state: these carry an expedite
    /// directive asking nearby clients to sample at peak rate.
    std::vector<SegmentId> expedited_segments() const;

    std::optional<QueryResult> query(const GeoPoint& p, double t, double max_snap_m) const;

    /// Pre-marks a segment as an established hotspot (used by simulation warm
    /// starts): sets v_max, fills every bin with the given aggregate, and puts
    /// the segment in Hotspot state.
    void seed_hotspot(SegmentId seg, double v_max, double bin_mean, int bin_count,
                      std::optional<double> d_in_m = std::nullopt);

    void set_d_in_override(SegmentId seg, double d_in_m) { d_in_override_[seg] = d_in_m; }
    double d_in_for(SegmentId seg) const;

    const SegmentCongestionState* find_state(SegmentId seg) const;
    const std::map<SegmentId, SegmentCongestionState>& states() const { return states_; }

    std::uint64_t ingested_count() const { return ingested_; }
    std::uint64_t rejected_speed_cap() const { return rejected_speed_cap_; }

    void set_record_transitions(bool on) { record_transitions_ = on; }
    const std::vector<Transition>& transition_log() const { return transitions_; }
    void clear_transition_log() { transitions_.clear(); }

    /// Versioned text checkpoint; dump -> load -> dump is byte-identical.
    void dump(std::ostream& out) const;
    static HotspotEngine load(std::istream& in, const RoadNetwork* net = nullptr);

  private:
    std::optional<Transition> evaluate(SegmentId seg, SegmentCongestionState& st, double now);
    void note_transition(SegmentId seg, SegmentCongestionState& st, SegState to, double now);

    EngineParams params_;
    const RoadNetwork* net_ = nullptr;
    std::map<SegmentId, SegmentCongestionState> states_;
    std::map<SegmentId, double> d_in_override_;
    std::uint64_t ingested_ = 0;
    std::uint64_t rejected_speed_cap_ = 0;
    bool record_transitions_ = false;
    std::vector<Transition> transitions_;

    friend struct EngineBatchAccess;
};

/// Pearson correlation of two segments' bin means over bins where both have
/// at least min_samples; empty when fewer than 3 such bins or either side is
/// constant.
std::optional<double> bin_mean_correlation(const SegmentCongestionState& a,
                                           const SegmentCongestionState& b, int min_samples);

}  // namespace hotspot
