#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pedflock/geometry.hpp"

namespace pedflock {

using Pid = std::int64_t;

/// Unordered pedestrian pair, stored as (smaller, larger).
using PidPair = std::pair<Pid, Pid>;

inline PidPair make_pair_key(Pid a, Pid b) {
    return a < b ? PidPair{a, b} : PidPair{b, a};
}

/// One tracked pedestrian at one time instant. Coordinates are millimeters,
/// speed mm/s, angles in [-pi, pi].
struct TrajectoryPoint {
    std::int64_t t_ms = 0;
    double x_mm = 0.0;
    double y_mm = 0.0;
    double speed_mm_s = 0.0;
    double motion_angle_rad = 0.0;
    double facing_angle_rad = 0.0;

    Vec2 pos() const { return {x_mm, y_mm}; }
};

/// Points strictly increasing in t_ms, never empty.
struct Trajectory {
    Pid pid = 0;
    std::vector<TrajectoryPoint> points;
};

using TrajectoryMap = std::map<Pid, Trajectory>;

struct GroupAnnotation {
    Pid pid = 0;
    int group_size = 0;
    std::vector<Pid> partner_ids;
};

struct Pillar {
    Vec2 center_mm;
    double radius_mm = 0.0;
};

struct SpotSegment {
    std::string label;
    Vec2 a_mm;
    Vec2 b_mm;
};

struct EnvironmentGeometry {
    std::vector<Vec2> boundary_mm;  // simple polygon, >= 3 vertices
    std::vector<Pillar> pillars;
    std::vector<SpotSegment> spots;
};

}  // namespace pedflock
