#include "pedflock/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace pedflock {

double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

BoundingBox bounding_box(std::span<const Vec2> pts) {
    if (pts.empty()) throw std::invalid_argument("bounding_box: empty point set");
    BoundingBox bb{pts[0], pts[0]};
    for (const Vec2& p : pts) {
        bb.min.x = std::min(bb.min.x, p.x);
        bb.min.y = std::min(bb.min.y, p.y);
        bb.max.x = std::max(bb.max.x, p.x);
        bb.max.y = std::max(bb.max.y, p.y);
    }
    return bb;
}

namespace {

int orientation_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = cross(b - a, c - a);
    double scale = std::abs(v) /
                   std::max({1.0, std::abs(b.x - a.x) + std::abs(b.y - a.y),
                             std::abs(c.x - a.x) + std::abs(c.y - a.y)});
    if (scale < 1e-12) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    if (orientation_sign(a, b, p) != 0) return false;
    return p.x >= std::min(a.x, b.x) - 1e-9 && p.x <= std::max(a.x, b.x) + 1e-9 &&
           p.y >= std::min(a.y, b.y) - 1e-9 && p.y <= std::max(a.y, b.y) + 1e-9;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    int o1 = orientation_sign(a, b, c);
    int o2 = orientation_sign(a, b, d);
    int o3 = orientation_sign(c, d, a);
    int o4 = orientation_sign(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

}  // namespace

bool polygon_is_simple(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Edges sharing a vertex are allowed to touch at that vertex only.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Vec2& c = poly[j];
            const Vec2& d = poly[(j + 1) % n];
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

double polygon_area(std::span<const Vec2> poly) {
    if (poly.size() < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        acc += cross(a, b);
    }
    return std::abs(acc) * 0.5;
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (on_segment(p, poly[i], poly[(i + 1) % n])) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        bool crosses = (a.y > p.y) != (b.y > p.y);
        if (crosses && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

std::vector<Vec2> convex_hull(std::span<const Vec2> pts) {
    std::vector<Vec2> p(pts.begin(), pts.end());
    std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    const std::size_t n = p.size();
    if (n < 3) return p;

    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = p[i];
    }
    for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    return hull;
}

double convex_hull_area_m2(std::span<const Vec2> pts_mm) {
    std::vector<Vec2> hull = convex_hull(pts_mm);
    return polygon_area(hull) * 1e-6;
}

bool circle_contains(const Circle& c, const Vec2& p, double eps) {
    return distance(c.center, p) <= c.radius + eps;
}

namespace {

Circle circle_from_two(const Vec2& a, const Vec2& b) {
    Vec2 center = (a + b) * 0.5;
    return {center, distance(a, b) * 0.5};
}

std::optional<Circle> circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
    double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    double scale = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y),
                             std::abs(c.x), std::abs(c.y), 1.0});
    if (std::abs(d) < 1e-12 * scale * scale) return std::nullopt;
    double a2 = dot(a, a), b2 = dot(b, b), c2 = dot(c, c);
    Vec2 center{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    return Circle{center, distance(center, a)};
}

Circle circle_from_three(const Vec2& a, const Vec2& b, const Vec2& c) {
    if (auto cc = circumcircle(a, b, c)) return *cc;
    // Collinear: the farthest pair's diameter circle covers all three.
    Circle best = circle_from_two(a, b);
    for (const Circle& cand : {circle_from_two(a, c), circle_from_two(b, c)}) {
        if (cand.radius > best.radius) best = cand;
    }
    return best;
}

Circle sec_with_two(std::span<const Vec2> pts, std::size_t limit, const Vec2& p, const Vec2& q) {
    Circle c = circle_from_two(p, q);
    for (std::size_t k = 0; k < limit; ++k) {
        if (!circle_contains(c, pts[k])) c = circle_from_three(p, q, pts[k]);
    }
    return c;
}

Circle sec_with_one(std::span<const Vec2> pts, std::size_t limit, const Vec2& p) {
    Circle c{p, 0.0};
    for (std::size_t j = 0; j < limit; ++j) {
        if (!circle_contains(c, pts[j])) c = sec_with_two(pts, j, p, pts[j]);
    }
    return c;
}

}  // namespace

Circle smallest_enclosing_circle(std::span<const Vec2> pts, std::uint64_t seed) {
    if (pts.empty()) throw std::invalid_argument("smallest_enclosing_circle: empty point set");
    std::vector<Vec2> p(pts.begin(), pts.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng() % i]);

    Circle c{p[0], 0.0};
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (!circle_contains(c, p[i])) c = sec_with_one(p, i, p[i]);
    }
    return c;
}

}  // namespace pedflock
