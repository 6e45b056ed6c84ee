#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hotspot/config.hpp"
#include "hotspot/hotspot_engine.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/road_network.hpp"

namespace hotspot {

/// One GPS fix from a cab-style trace.
struct TraceRecord {
    std::string vehicle;
    GeoPoint pos;
    int occupancy = 0;
    std::int64_t t_unix = 0;
};

/// Accounting for one trace ingestion. Every input line and every pair ends
/// up in exactly one bucket, so the totals reconcile.
struct TraceIngestReport {
    std::uint64_t lines_total = 0;
    std::uint64_t lines_blank = 0;
    std::uint64_t lines_parsed = 0;
    std::uint64_t parse_errors = 0;
    std::uint64_t dup_timestamp_dropped = 0;
    std::uint64_t records_kept = 0;
    std::uint64_t vehicles = 0;

    std::uint64_t pairs_total = 0;
    std::uint64_t pairs_ingested = 0;
    std::uint64_t pairs_snap_rejected = 0;
    std::uint64_t pairs_gap_skipped = 0;
    std::uint64_t pairs_unreachable = 0;
    std::uint64_t pairs_speed_cap = 0;

    bool lines_reconcile() const {
        return lines_total == lines_blank + lines_parsed + parse_errors;
    }
    bool pairs_reconcile() const {
        return pairs_total == pairs_ingested + pairs_snap_rejected + pairs_gap_skipped +
                                  pairs_unreachable + pairs_speed_cap;
    }
};

/// Reads per-vehicle trace files (`lat lon occupancy unix_time` per line, one
/// file per vehicle, whitespace- or comma-separated) from a directory, or a
/// combined CSV (`vehicle_id,lat,lon,occupancy,unix_time`) from a single
/// file. Bad lines are counted, not fatal.
std::vector<TraceRecord> read_trace(const std::string& path, TraceIngestReport& report);

/// Replays a trace into the engine: per-vehicle consecutive fixes are paired,
/// speeds derived from road distance over elapsed time, and each speed is
/// attributed to the snapped segment of the later fix. Pair computation can
/// run in parallel; engine ingestion stays in timestamp order.
TraceIngestReport ingest_trace(const std::string& path, const RoadNetwork& net,
                               HotspotEngine& engine, const AppConfig& config,
                               Exec exec = Exec::Serial);

struct NdRow {
    SegmentId segment = 0;
    double nd = 0.0;       // stddev / mean over bins that meet the data floor
    bool hotspot = false;  // classified High in at least one qualified bin
};

/// Per-segment normalized deviation, pooled across qualified bins.
std::vector<NdRow> nd_table(const HotspotEngine& engine, Exec exec = Exec::Serial);

/// Count of segments classified High per time bin.
std::vector<int> hotspots_over_time(const HotspotEngine& engine);

void write_nd_cdf_csv(const std::string& path, const std::vector<NdRow>& rows);
void write_hotspots_per_bin_csv(const std::string& path, const std::vector<int>& counts);
void write_heatmap_csv(const std::string& path, const HotspotEngine& engine);

}  // namespace hotspot
