#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pedflock/trajectory.hpp"

namespace pedflock {

/// One agent's resampled segment inside a bin. After filter_min_length the
/// sample count is exactly the configured sequence length.
struct TrajectoryWindow {
    Pid pid = 0;
    int bin_index = 0;
    double rate_hz = 0.0;
    std::vector<TrajectoryPoint> samples;

    std::int64_t start_ms() const { return samples.front().t_ms; }
    std::int64_t end_ms() const { return samples.back().t_ms; }
};

struct TimeBin {
    int bin_index = 0;
    std::int64_t t_start_ms = 0;
    std::int64_t t_end_ms = 0;
    std::vector<TrajectoryWindow> windows;
};

/// Resample to a uniform rate: timestamps form an arithmetic sequence at
/// 1/rate_hz from the original first timestamp, positions/speed linearly
/// interpolated, angles along the shorter arc. No extrapolation; inputs too
/// short for two output samples yield an empty trajectory.
Trajectory resample_uniform(const Trajectory& traj, double rate_hz);

struct BinningResult {
    std::vector<TimeBin> bins;
    std::int64_t origin_ms = 0;    // earliest first-timestamp
    std::int64_t interval_ms = 0;
};

/// Assign each trajectory to the bin of its first timestamp. Empty bins in
/// the covered range are materialized.
BinningResult assign_bins(const TrajectoryMap& resampled, std::int64_t interval_ms,
                          double rate_hz);

/// Keep windows with >= seq_len samples, truncated to their first seq_len.
TimeBin filter_min_length(const TimeBin& bin, std::size_t seq_len);

void filter_min_length(BinningResult& result, std::size_t seq_len);

struct BinStats {
    std::size_t total_agents = 0;
    std::size_t bins_total = 0;
    std::size_t bins_nonempty = 0;
    std::optional<std::size_t> min_agents_per_bin;  // over non-empty bins
    std::optional<std::size_t> max_agents_per_bin;
    std::optional<double> mean_agents_per_bin;
};

BinStats bin_stats(std::span<const TimeBin> bins);

}  // namespace pedflock
