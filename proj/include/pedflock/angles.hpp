#pragma once

#include <cmath>
#include <optional>
#include <span>

namespace pedflock {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle into (-pi, pi]. A difference of exactly pi maps to +pi.
inline double wrap_angle(double rad) {
    double r = std::fmod(rad, kTwoPi);
    if (r > kPi) r -= kTwoPi;
    if (r <= -kPi) r += kTwoPi;
    return r;
}

/// Absolute circular difference, in [0, pi].
inline double angle_abs_diff(double a, double b) {
    return std::abs(wrap_angle(a - b));
}

/// Interpolate from a to b along the shorter arc; f in [0, 1].
inline double lerp_angle(double a, double b, double f) {
    return wrap_angle(a + f * wrap_angle(b - a));
}

/// Mean direction of a set of angles (mean of unit vectors, then atan2).
/// Undefined when the mean vector is shorter than min_resultant.
inline std::optional<double> circular_mean(std::span<const double> angles,
                                           double min_resultant = 1e-9) {
    if (angles.empty()) return std::nullopt;
    double sx = 0.0, sy = 0.0;
    for (double a : angles) {
        sx += std::cos(a);
        sy += std::sin(a);
    }
    sx /= static_cast<double>(angles.size());
    sy /= static_cast<double>(angles.size());
    if (std::hypot(sx, sy) < min_resultant) return std::nullopt;
    return std::atan2(sy, sx);
}

}  // namespace pedflock
