#pragma once

#include <optional>
#include <vector>

#include "hotspot/hotspot_engine.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/road_network.hpp"

namespace hotspot {

/// One server-side sample already attributed to a segment.
struct AttributedSample {
    SegmentId segment = 0;
    double t = 0.0;
    double speed_mps = 0.0;
};

/// Snaps a batch of points. Results line up with the input order, so the
/// serial and parallel paths return identical vectors.
std::vector<std::optional<SnapResult>> snap_batch(const std::vector<GeoPoint>& points,
                                                  const RoadNetwork& net, double max_snap_m,
                                                  Exec exec);

struct IngestBatchResult {
    std::uint64_t accepted = 0;
    std::uint64_t rejected_speed_cap = 0;
    std::uint64_t rejected_invalid = 0;
};

/// Feeds samples to the engine. Serial mode applies them in input order; the
/// parallel path shards by segment (ingestion is independent across segments
/// and serialized within one), preserving per-segment input order, and
/// produces the identical final engine state. Requires transition recording
/// to be off in parallel mode.
IngestBatchResult ingest_batch(HotspotEngine& engine, const std::vector<AttributedSample>& samples,
                               Exec exec);

}  // namespace hotspot
