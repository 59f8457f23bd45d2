#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pedflock/trajectory.hpp"

namespace pedflock::synth {

struct WalkerSpec {
    Pid pid = 0;
    double entry_s = 0.0;
    double speed_mm_s = 0.0;
    double lane_y_mm = 0.0;
    int direction = 1;  // +1 walks +x, -1 walks -x
};

struct GroupSpec {
    std::vector<Pid> pids;
    double entry_s = 0.0;
    double speed_mm_s = 0.0;
    double lane_y_mm = 0.0;
    int direction = 1;
    double lateral_offset_mm = 600.0;  // spacing between adjacent members
};

/// Constant-velocity corridor walkers with Gaussian positional noise; group
/// members share velocity and hold their lateral offsets.
struct ScenarioSpec {
    double corridor_length_mm = 55000.0;
    double corridor_width_mm = 5000.0;
    double sample_interval_ms = 100.0;
    double noise_sigma_mm = 50.0;
    std::int64_t t0_ms = 1'000'000'000'000;  // timestamp of scenario time zero
    std::vector<WalkerSpec> singles;
    std::vector<GroupSpec> groups;
};

struct ScenarioOutput {
    std::string tracking_csv;  // byte-deterministic for a fixed (spec, seed)
    std::string annotations_txt;
    std::string geometry_json;
};

/// Throws on duplicate pids across singles and groups.
ScenarioOutput generate_synthetic_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// The stock corridor fixture: n_pairs planted pairs walking side by side
/// plus n_singles independent walkers with staggered entries.
ScenarioSpec make_default_scenario(std::size_t n_pairs = 8, std::size_t n_singles = 24,
                                   double lateral_offset_mm = 600.0,
                                   double noise_sigma_mm = 50.0);

ScenarioSpec read_scenario(std::istream& in);

}  // namespace pedflock::synth
