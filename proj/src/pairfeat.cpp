#include "pedflock/pairfeat.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pedflock/angles.hpp"

namespace pedflock {

namespace {

void require_equal_length(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("pair features require equal window lengths");
}

std::optional<double> window_mean_angle(const TrajectoryWindow& w, bool facing) {
    std::vector<double> angles;
    angles.reserve(w.samples.size());
    for (const auto& s : w.samples)
        angles.push_back(facing ? s.facing_angle_rad : s.motion_angle_rad);
    return circular_mean(angles);
}

std::optional<double> angle_feature(const TrajectoryWindow& a, const TrajectoryWindow& b,
                                    bool facing) {
    require_equal_length(a, b);
    auto ma = window_mean_angle(a, facing);
    auto mb = window_mean_angle(b, facing);
    if (!ma || !mb) return std::nullopt;
    return angle_abs_diff(*ma, *mb);
}

}  // namespace

double mean_inter_distance(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    require_equal_length(a, b);
    if (a.samples.empty()) throw std::invalid_argument("mean_inter_distance: empty windows");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        acc += distance(a.samples[i].pos(), b.samples[i].pos());
    return acc / static_cast<double>(a.samples.size());
}

double start_time_diff(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    return std::abs(static_cast<double>(a.start_ms() - b.start_ms())) / 1000.0;
}

double mean_speed_diff(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    require_equal_length(a, b);
    if (a.samples.empty()) throw std::invalid_argument("mean_speed_diff: empty windows");
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        sa += a.samples[i].speed_mm_s;
        sb += b.samples[i].speed_mm_s;
    }
    return std::abs(sa - sb) / static_cast<double>(a.samples.size());
}

std::optional<double> motion_angle_diff(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    return angle_feature(a, b, /*facing=*/false);
}

std::optional<double> facing_angle_diff(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    return angle_feature(a, b, /*facing=*/true);
}

double dtw_distance(const TrajectoryWindow& a, const TrajectoryWindow& b) {
    const auto& sa = a.samples;
    const auto& sb = b.samples;
    if (sa.empty() || sb.empty()) throw std::invalid_argument("dtw_distance: empty windows");
    const std::size_t n = sa.size();
    const std::size_t m = sb.size();

    // Rolling rows: O(m) storage.
    std::vector<double> prev(m), cur(m);
    prev[0] = distance(sa[0].pos(), sb[0].pos());
    for (std::size_t j = 1; j < m; ++j)
        prev[j] = prev[j - 1] + distance(sa[0].pos(), sb[j].pos());

    for (std::size_t i = 1; i < n; ++i) {
        cur[0] = prev[0] + distance(sa[i].pos(), sb[0].pos());
        for (std::size_t j = 1; j < m; ++j) {
            double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = best + distance(sa[i].pos(), sb[j].pos());
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

std::optional<PairFeatures> extract_pair_features(const TrajectoryWindow& a,
                                                  const TrajectoryWindow& b) {
    auto motion = motion_angle_diff(a, b);
    auto facing = facing_angle_diff(a, b);
    if (!motion || !facing) return std::nullopt;

    PairFeatures f;
    f.mean_inter_distance_mm = mean_inter_distance(a, b);
    f.start_time_diff_s = start_time_diff(a, b);
    f.mean_speed_diff_mm_s = mean_speed_diff(a, b);
    f.motion_angle_diff_rad = *motion;
    f.facing_angle_diff_rad = *facing;
    f.dtw_distance_mm = dtw_distance(a, b);
    return f;
}

}  // namespace pedflock
