#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pedflock {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
double norm(const Vec2& v);
double distance(const Vec2& a, const Vec2& b);

struct BoundingBox {
    Vec2 min;
    Vec2 max;
};

BoundingBox bounding_box(std::span<const Vec2> pts);

/// True when no two non-adjacent edges of the closed polygon intersect.
bool polygon_is_simple(std::span<const Vec2> poly);

/// Shoelace area of a closed polygon, always non-negative.
double polygon_area(std::span<const Vec2> poly);

/// Crossing-number test; points on an edge or vertex count as inside.
bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly);

/// Monotone-chain convex hull, counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::span<const Vec2> pts);

/// Hull area of a point set given in millimeters, returned in square meters.
/// Fewer than three non-collinear points yield zero.
double convex_hull_area_m2(std::span<const Vec2> pts_mm);

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

bool circle_contains(const Circle& c, const Vec2& p, double eps = 1e-7);

/// Welzl's randomized incremental algorithm; the seed drives the shuffle.
Circle smallest_enclosing_circle(std::span<const Vec2> pts, std::uint64_t seed);

}  // namespace pedflock
