#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hotspot/energy_model.hpp"
#include "hotspot/hotspot_engine.hpp"
#include "hotspot/road_network.hpp"

namespace hotspot::testsupport {

// ---------------------------------------------------------------------------
// Independent oracles. These re-derive results from first principles and must
// not share code with the implementation paths they check.
// ---------------------------------------------------------------------------

/// Step-by-step trip recursion: first sample at the zone edge (x=0, interval
/// s_min), then x += v_out * y with y re-evaluated from the distance law at
/// each sample, until x >= d_out. Returns the number of samples.
int step_oracle_n_out(const TripParams& p, int hard_cap = 10'000'000);

/// Brute-force reimplementation of the per-segment state machine: statistics
/// are recomputed from the full raw history at every event (no running
/// accumulators), then the same marking rules are applied.
struct OracleOutcome {
    SegState state = SegState::Uncongested;
    CongestionLevel level = CongestionLevel::None;
    std::vector<std::pair<SegState, SegState>> transitions;
};
OracleOutcome replay_oracle(const std::vector<RecentSample>& events, const EngineParams& params);

/// One-sided Kolmogorov-Smirnov statistic sup_x (F_b(x) - F_a(x)); positive
/// and large when sample `a` stochastically dominates sample `b`.
double ks_one_sided(std::vector<double> a, std::vector<double> b);

// ---------------------------------------------------------------------------
// Synthetic fixtures.
// ---------------------------------------------------------------------------

/// Straight south-to-north corridor: nodes every seg_len_m, segment ids
/// 0..n-1. Optional stub segment (id stub_id) hanging south of node 0 so a
/// hotspot can be anchored exactly at the corridor origin.
std::string corridor_network_text(int n_segments, double seg_len_m, bool with_stub,
                                  SegmentId stub_id = 99);

/// Grid with `rows` x `cols` nodes; emits rows*(cols-1) + cols*(rows-1)
/// segments. Returns the network file text.
std::string grid_network_text(int rows, int cols, double spacing_m, double lat0 = 12.90,
                              double lon0 = 77.50);

struct SfoFixture {
    std::string network_text;
    std::string trace_csv;                 // combined vehicle_id,lat,lon,occupancy,unix_time
    std::vector<SegmentId> hotspot_segments;
    std::uint64_t fix_count = 0;
};

/// SFO-style synthetic fleet: n_vehicles cabs reporting once a minute on a
/// grid, with a designated set of segments that crawl during the peak bins
/// (17:00-18:30) and flow freely otherwise.
SfoFixture make_sfo_fixture(int n_vehicles, double duration_s, std::uint64_t seed,
                            double start_hour_local = 14.0);

/// Writes content to path, creating parent directories.
void write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace hotspot::testsupport
