#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pedflock/angles.hpp"
#include "pedflock/pairfeat.hpp"
#include "test_helpers.hpp"

using namespace pedflock;
using helpers::make_window;
using helpers::random_window;

TEST_CASE("mean_inter_distance: identity, constant offset, oracle") {
    auto a = make_window(1, {{0, 0}, {100, 0}, {200, 0}});
    CHECK(mean_inter_distance(a, a) == doctest::Approx(0.0));

    auto b = make_window(2, {{0, 800}, {100, 800}, {200, 800}});
    CHECK(mean_inter_distance(a, b) == doctest::Approx(800.0));

    std::mt19937_64 rng(1);
    auto wa = random_window(1, 10, rng);
    auto wb = random_window(2, 10, rng);
    double naive = 0.0;
    for (std::size_t i = 0; i < 10; ++i)
        naive += std::hypot(wa.samples[i].x_mm - wb.samples[i].x_mm,
                            wa.samples[i].y_mm - wb.samples[i].y_mm);
    naive /= 10.0;
    CHECK(mean_inter_distance(wa, wb) == doctest::Approx(naive).epsilon(1e-9));

    auto short_w = make_window(3, {{0, 0}});
    CHECK_THROWS(mean_inter_distance(a, short_w));
}

TEST_CASE("start_time_diff: zero, 2.5 s, symmetric") {
    auto a = make_window(1, {{0, 0}, {1, 0}}, 0);
    auto b = make_window(2, {{0, 0}, {1, 0}}, 2500);
    CHECK(start_time_diff(a, a) == doctest::Approx(0.0));
    CHECK(start_time_diff(a, b) == doctest::Approx(2.5));
    CHECK(start_time_diff(a, b) == start_time_diff(b, a));
}

TEST_CASE("mean_speed_diff: constant speeds and oracle") {
    auto a = make_window(1, {{0, 0}, {1, 0}}, 0, 3.0, 1200.0);
    auto b = make_window(2, {{0, 0}, {1, 0}}, 0, 3.0, 1500.0);
    CHECK(mean_speed_diff(a, a) == doctest::Approx(0.0));
    CHECK(mean_speed_diff(a, b) == doctest::Approx(300.0));

    std::mt19937_64 rng(2);
    auto wa = random_window(1, 16, rng);
    auto wb = random_window(2, 16, rng);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < 16; ++i) {
        ma += wa.samples[i].speed_mm_s;
        mb += wb.samples[i].speed_mm_s;
    }
    CHECK(mean_speed_diff(wa, wb) == doctest::Approx(std::abs(ma - mb) / 16.0).epsilon(1e-9));
}

TEST_CASE("motion_angle_diff: aligned, opposed, wrap-around") {
    auto east_a = make_window(1, {{0, 0}, {1, 0}}, 0, 3.0, 100.0, 0.0);
    auto east_b = make_window(2, {{0, 0}, {1, 0}}, 0, 3.0, 100.0, 0.0);
    CHECK(*motion_angle_diff(east_a, east_b) == doctest::Approx(0.0));

    auto west = make_window(3, {{0, 0}, {1, 0}}, 0, 3.0, 100.0, kPi);
    CHECK(*motion_angle_diff(east_a, west) == doctest::Approx(kPi));

    auto near_pi = make_window(4, {{0, 0}, {1, 0}}, 0, 3.0, 100.0, 3.1);
    auto near_minus_pi = make_window(5, {{0, 0}, {1, 0}}, 0, 3.0, 100.0, -3.1);
    CHECK(*motion_angle_diff(near_pi, near_minus_pi) ==
          doctest::Approx(2 * kPi - 6.2).epsilon(1e-9));
}

TEST_CASE("angle diff: undefined mean direction flags the pair invalid") {
    TrajectoryWindow spin = make_window(1, {{0, 0}, {1, 0}});
    spin.samples[0].motion_angle_rad = 0.0;
    spin.samples[1].motion_angle_rad = kPi;  // opposing unit vectors
    auto other = make_window(2, {{0, 0}, {1, 0}});
    CHECK_FALSE(motion_angle_diff(spin, other).has_value());
    CHECK_FALSE(extract_pair_features(spin, other).has_value());
}

TEST_CASE("angle diffs invariant under global rotation") {
    std::mt19937_64 rng(3);
    auto wa = random_window(1, 24, rng);
    auto wb = random_window(2, 24, rng);
    double base_motion = *motion_angle_diff(wa, wb);
    double base_facing = *facing_angle_diff(wa, wb);

    const double delta = 1.9;
    auto ra = wa, rb = wb;
    for (auto& s : ra.samples) {
        s.motion_angle_rad = wrap_angle(s.motion_angle_rad + delta);
        s.facing_angle_rad = wrap_angle(s.facing_angle_rad + delta);
    }
    for (auto& s : rb.samples) {
        s.motion_angle_rad = wrap_angle(s.motion_angle_rad + delta);
        s.facing_angle_rad = wrap_angle(s.facing_angle_rad + delta);
    }
    CHECK(*motion_angle_diff(ra, rb) == doctest::Approx(base_motion).epsilon(1e-9));
    CHECK(*facing_angle_diff(ra, rb) == doctest::Approx(base_facing).epsilon(1e-9));
}

TEST_CASE("dtw_distance: identity, single point, DP-table oracle") {
    auto a = make_window(1, {{0, 0}, {100, 50}, {200, 100}});
    CHECK(dtw_distance(a, a) == doctest::Approx(0.0));

    auto p = make_window(1, {{0, 0}});
    auto q = make_window(2, {{300, 400}});
    CHECK(dtw_distance(p, q) == doctest::Approx(500.0));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        auto wa = random_window(1, 8, rng);
        auto wb = random_window(2, 8, rng);
        CHECK(dtw_distance(wa, wb) ==
              doctest::Approx(oracles::dtw_full_table(wa, wb)).epsilon(1e-9));
    }
}

TEST_CASE("dtw endpoints are always matched (lower bound)") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto wa = random_window(1, 12, rng);
        auto wb = random_window(2, 12, rng);
        double d_first = distance(wa.samples.front().pos(), wb.samples.front().pos());
        double d_last = distance(wa.samples.back().pos(), wb.samples.back().pos());
        CHECK(dtw_distance(wa, wb) >= std::max(d_first, d_last) - 1e-9);
    }
}

TEST_CASE("translation invariance of distance features") {
    std::mt19937_64 rng(6);
    auto wa = random_window(1, 15, rng);
    auto wb = random_window(2, 15, rng);
    double base_inter = mean_inter_distance(wa, wb);
    double base_dtw = dtw_distance(wa, wb);

    auto ta = wa, tb = wb;
    for (auto& s : ta.samples) {
        s.x_mm += 5432.1;
        s.y_mm -= 987.6;
    }
    for (auto& s : tb.samples) {
        s.x_mm += 5432.1;
        s.y_mm -= 987.6;
    }
    CHECK(mean_inter_distance(ta, tb) == doctest::Approx(base_inter).epsilon(1e-9));
    CHECK(dtw_distance(ta, tb) == doctest::Approx(base_dtw).epsilon(1e-9));
}

TEST_CASE("extract_pair_features: all-zero identity and exact swap symmetry") {
    auto a = make_window(1, {{0, 0}, {100, 100}, {200, 150}}, 0, 3.0, 1000.0, 0.3, 0.4);
    auto copy = a;
    copy.pid = 2;
    auto f = extract_pair_features(a, copy);
    REQUIRE(f.has_value());
    for (double v : f->as_array()) CHECK(v == doctest::Approx(0.0));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto wa = random_window(1, 10, rng);
        auto wb = random_window(2, 10, rng, 4000);
        auto fab = extract_pair_features(wa, wb);
        auto fba = extract_pair_features(wb, wa);
        REQUIRE(fab.has_value());
        REQUIRE(fba.has_value());
        auto xa = fab->as_array();
        auto xb = fba->as_array();
        for (std::size_t k = 0; k < 6; ++k) CHECK(xa[k] == xb[k]);  // exact equality
    }
}

TEST_CASE("planted side-by-side pair dominates an opposing pair on every feature") {
    // Side-by-side: same start, same speed, 600 mm lateral offset.
    std::vector<std::pair<double, double>> lane_a, lane_b, opposing;
    for (int i = 0; i < 30; ++i) {
        lane_a.push_back({i * 400.0, 1000.0});
        lane_b.push_back({i * 400.0, 1600.0});
        opposing.push_back({20000.0 - i * 450.0, 3000.0});
    }
    auto wa = make_window(1, lane_a, 0, 3.0, 1200.0, 0.0, 0.0);
    auto wb = make_window(2, lane_b, 0, 3.0, 1200.0, 0.0, 0.0);
    auto wc = make_window(3, opposing, 5000, 3.0, 1350.0, kPi, kPi);

    auto planted = extract_pair_features(wa, wb);
    auto crossing = extract_pair_features(wa, wc);
    REQUIRE(planted.has_value());
    REQUIRE(crossing.has_value());
    auto p = planted->as_array();
    auto c = crossing->as_array();
    for (std::size_t k = 0; k < 6; ++k) CHECK(p[k] < c[k]);
}
