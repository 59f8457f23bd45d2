#include "pedflock/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pedflock/angles.hpp"

namespace pedflock {

namespace {

TrajectoryPoint interpolate(const TrajectoryPoint& a, const TrajectoryPoint& b,
                            std::int64_t t_ms) {
    if (t_ms == a.t_ms || b.t_ms == a.t_ms) return a;
    if (t_ms == b.t_ms) return b;
    double f = static_cast<double>(t_ms - a.t_ms) / static_cast<double>(b.t_ms - a.t_ms);
    TrajectoryPoint out;
    out.t_ms = t_ms;
    out.x_mm = a.x_mm + f * (b.x_mm - a.x_mm);
    out.y_mm = a.y_mm + f * (b.y_mm - a.y_mm);
    out.speed_mm_s = a.speed_mm_s + f * (b.speed_mm_s - a.speed_mm_s);
    out.motion_angle_rad = lerp_angle(a.motion_angle_rad, b.motion_angle_rad, f);
    out.facing_angle_rad = lerp_angle(a.facing_angle_rad, b.facing_angle_rad, f);
    return out;
}

}  // namespace

Trajectory resample_uniform(const Trajectory& traj, double rate_hz) {
    if (rate_hz <= 0.0) throw std::invalid_argument("resample_uniform: rate_hz must be > 0");
    Trajectory out;
    out.pid = traj.pid;
    if (traj.points.size() < 2) return out;

    const std::int64_t t0 = traj.points.front().t_ms;
    const std::int64_t t_last = traj.points.back().t_ms;
    const double step_ms = 1000.0 / rate_hz;

    std::size_t seg = 0;  // invariant: points[seg].t_ms <= t < points[seg+1].t_ms
    for (std::size_t i = 0;; ++i) {
        const std::int64_t t = t0 + std::llround(static_cast<double>(i) * step_ms);
        if (t > t_last) break;
        while (seg + 2 < traj.points.size() && traj.points[seg + 1].t_ms <= t) ++seg;
        out.points.push_back(interpolate(traj.points[seg], traj.points[seg + 1], t));
    }
    if (out.points.size() < 2) out.points.clear();
    return out;
}

BinningResult assign_bins(const TrajectoryMap& resampled, std::int64_t interval_ms,
                          double rate_hz) {
    if (interval_ms <= 0) throw std::invalid_argument("assign_bins: interval_ms must be > 0");
    BinningResult out;
    out.interval_ms = interval_ms;
    if (resampled.empty()) return out;

    std::int64_t origin = resampled.begin()->second.points.front().t_ms;
    std::int64_t latest = origin;
    for (const auto& [pid, traj] : resampled) {
        origin = std::min(origin, traj.points.front().t_ms);
        latest = std::max(latest, traj.points.front().t_ms);
    }
    out.origin_ms = origin;

    const std::size_t n_bins = static_cast<std::size_t>((latest - origin) / interval_ms) + 1;
    out.bins.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        out.bins[i].bin_index = static_cast<int>(i);
        out.bins[i].t_start_ms = origin + static_cast<std::int64_t>(i) * interval_ms;
        out.bins[i].t_end_ms = out.bins[i].t_start_ms + interval_ms;
    }
    for (const auto& [pid, traj] : resampled) {
        const auto idx =
            static_cast<std::size_t>((traj.points.front().t_ms - origin) / interval_ms);
        TrajectoryWindow w;
        w.pid = pid;
        w.bin_index = static_cast<int>(idx);
        w.rate_hz = rate_hz;
        w.samples = traj.points;
        out.bins[idx].windows.push_back(std::move(w));
    }
    return out;
}

TimeBin filter_min_length(const TimeBin& bin, std::size_t seq_len) {
    TimeBin out;
    out.bin_index = bin.bin_index;
    out.t_start_ms = bin.t_start_ms;
    out.t_end_ms = bin.t_end_ms;
    for (const auto& w : bin.windows) {
        if (w.samples.size() < seq_len) continue;
        TrajectoryWindow kept = w;
        kept.samples.resize(seq_len);
        out.windows.push_back(std::move(kept));
    }
    return out;
}

void filter_min_length(BinningResult& result, std::size_t seq_len) {
    for (auto& bin : result.bins) bin = filter_min_length(bin, seq_len);
}

BinStats bin_stats(std::span<const TimeBin> bins) {
    BinStats s;
    s.bins_total = bins.size();
    std::size_t sum_nonempty = 0;
    for (const auto& bin : bins) {
        const std::size_t n = bin.windows.size();
        s.total_agents += n;
        if (n == 0) continue;
        ++s.bins_nonempty;
        sum_nonempty += n;
        s.min_agents_per_bin = std::min(s.min_agents_per_bin.value_or(n), n);
        s.max_agents_per_bin = std::max(s.max_agents_per_bin.value_or(n), n);
    }
    if (s.bins_nonempty > 0)
        s.mean_agents_per_bin = static_cast<double>(sum_nonempty) / s.bins_nonempty;
    return s;
}

}  // namespace pedflock
