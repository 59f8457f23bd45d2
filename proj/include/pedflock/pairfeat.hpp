#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "pedflock/binning.hpp"

namespace pedflock {

/// The six pairwise descriptors feeding the pair classifier. All values are
/// finite, non-negative, and symmetric under argument swap.
struct PairFeatures {
    double mean_inter_distance_mm = 0.0;
    double start_time_diff_s = 0.0;
    double mean_speed_diff_mm_s = 0.0;
    double motion_angle_diff_rad = 0.0;  // in [0, pi]
    double facing_angle_diff_rad = 0.0;  // in [0, pi]
    double dtw_distance_mm = 0.0;

    std::array<double, 6> as_array() const {
        return {mean_inter_distance_mm, start_time_diff_s,   mean_speed_diff_mm_s,
                motion_angle_diff_rad,  facing_angle_diff_rad, dtw_distance_mm};
    }
};

inline constexpr std::array<std::string_view, 6> kFeatureNames = {
    "mean_inter_distance_mm", "start_time_diff_s",     "mean_speed_diff_mm_s",
    "motion_angle_diff_rad",  "facing_angle_diff_rad", "dtw_distance_mm"};

/// Index-aligned average Euclidean distance. Throws on length mismatch.
double mean_inter_distance(const TrajectoryWindow& a, const TrajectoryWindow& b);

double start_time_diff(const TrajectoryWindow& a, const TrajectoryWindow& b);

/// |mean speed difference|. Throws on length mismatch.
double mean_speed_diff(const TrajectoryWindow& a, const TrajectoryWindow& b);

/// Circular-mean of each window's motion angles, then absolute wrapped
/// difference. Empty when either window has no defined mean direction.
std::optional<double> motion_angle_diff(const TrajectoryWindow& a, const TrajectoryWindow& b);

std::optional<double> facing_angle_diff(const TrajectoryWindow& a, const TrajectoryWindow& b);

/// Classic unnormalized DTW over 2-D positions, steps (1,0),(0,1),(1,1),
/// no window constraint; accumulated cost at (L,L).
double dtw_distance(const TrajectoryWindow& a, const TrajectoryWindow& b);

/// All six features; empty when an angle series has no mean direction
/// (the pair is skipped upstream).
std::optional<PairFeatures> extract_pair_features(const TrajectoryWindow& a,
                                                  const TrajectoryWindow& b);

}  // namespace pedflock
