#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pedflock/angles.hpp"
#include "pedflock/metrics.hpp"
#include "test_helpers.hpp"

using namespace pedflock;
using helpers::make_window;

namespace {

EnvironmentGeometry rect_env(double w = 55000, double h = 5000) {
    EnvironmentGeometry geo;
    geo.boundary_mm = {{0, 0}, {w, 0}, {w, h}, {0, h}};
    return geo;
}

// Two walkers approaching then separating along x, constant speed.
TimeBin passing_bin(double min_gap_mm, double lane_gap_mm = 0.0) {
    TimeBin bin;
    bin.bin_index = 0;
    std::vector<std::pair<double, double>> fwd, bwd;
    for (int i = 0; i <= 40; ++i) {
        fwd.push_back({i * 500.0, 2000.0});
        bwd.push_back({20000.0 + min_gap_mm - i * 500.0, 2000.0 + lane_gap_mm});
    }
    bin.windows.push_back(make_window(1, fwd, 0, 2.0, 1000.0, 0.0, 0.0));
    bin.windows.push_back(make_window(2, bwd, 0, 2.0, 1000.0, kPi, kPi));
    return bin;
}

}  // namespace

TEST_CASE("accumulate_heatmap: single cell, empty input, mass conservation") {
    auto geo = rect_env(10000, 10000);
    std::vector<Vec2> ten(10, Vec2{1250.0, 1250.0});
    HeatmapGrid grid = accumulate_heatmap(ten, geo, 500.0);
    CHECK(grid.at(2, 2) == 10);
    CHECK(grid.total == 10);
    CHECK(std::log10(static_cast<double>(grid.at(2, 2))) == doctest::Approx(1.0));

    HeatmapGrid empty = accumulate_heatmap({}, geo, 500.0);
    CHECK(empty.total == 0);
    for (auto c : empty.counts) CHECK(c == 0);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> coord(-2000.0, 12000.0);
    std::vector<Vec2> pts;
    std::size_t inside = 0;
    for (int i = 0; i < 5000; ++i) {
        Vec2 p{coord(rng), coord(rng)};
        pts.push_back(p);
        if (point_in_polygon(p, geo.boundary_mm)) ++inside;
    }
    HeatmapGrid random_grid = accumulate_heatmap(pts, geo, 333.0);
    CHECK(static_cast<std::size_t>(random_grid.total) == inside);
    std::int64_t sum = 0;
    for (auto c : random_grid.counts) sum += c;
    CHECK(sum == random_grid.total);  // exact mass conservation
}

TEST_CASE("trajectory_straightness: straight, loop, right angle, stationary") {
    auto straight = make_window(1, {{0, 0}, {500, 0}, {1000, 0}, {1500, 0}});
    CHECK(trajectory_straightness(straight) == doctest::Approx(1.0));

    auto loop = make_window(1, {{0, 0}, {1000, 0}, {1000, 1000}, {0, 1000}, {0, 0}});
    CHECK(trajectory_straightness(loop) == doctest::Approx(0.0));

    auto corner = make_window(1, {{0, 0}, {1000, 0}, {1000, 1000}});
    CHECK(trajectory_straightness(corner) == doctest::Approx(std::sqrt(2.0) / 2.0));

    auto still = make_window(1, {{700, 700}, {700, 700}, {700, 700}});
    CHECK(trajectory_straightness(still) == doctest::Approx(1.0));
}

TEST_CASE("straightness stays in [0,1] on random windows") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        auto w = helpers::random_window(1, 20, rng);
        double s = trajectory_straightness(w);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("clearance_radius: symmetric pair, middle of three, naive-scan oracle") {
    TimeBin bin;
    bin.bin_index = 0;
    bin.windows.push_back(make_window(1, {{0, 0}, {100, 0}}, 0));
    bin.windows.push_back(make_window(2, {{0, 900}, {100, 900}}, 0));
    CHECK(*clearance_radius(bin, 1, 0) == doctest::Approx(900.0));
    CHECK(*clearance_radius(bin, 2, 0) == doctest::Approx(900.0));

    TimeBin trio;
    trio.windows.push_back(make_window(1, {{0, 0}, {0, 0}}, 0));
    trio.windows.push_back(make_window(2, {{1000, 0}, {1000, 0}}, 0));
    trio.windows.push_back(make_window(3, {{3000, 0}, {3000, 0}}, 0));
    CHECK(*clearance_radius(trio, 2, 0) == doctest::Approx(1000.0));

    TimeBin lonely;
    lonely.windows.push_back(make_window(1, {{0, 0}, {100, 0}}, 0));
    CHECK_FALSE(clearance_radius(lonely, 1, 0).has_value());

    std::mt19937_64 rng(10);
    TimeBin random_bin;
    for (Pid pid = 1; pid <= 6; ++pid)
        random_bin.windows.push_back(helpers::random_window(pid, 12, rng));
    for (const auto& w : random_bin.windows) {
        for (const auto& s : w.samples) {
            auto lib = clearance_radius(random_bin, w.pid, s.t_ms);
            // Oracle: exhaustive scan over other windows sharing the timestamp.
            std::optional<double> naive;
            for (const auto& other : random_bin.windows) {
                if (other.pid == w.pid) continue;
                for (const auto& os : other.samples) {
                    if (os.t_ms != s.t_ms) continue;
                    double d = std::hypot(os.x_mm - s.x_mm, os.y_mm - s.y_mm);
                    if (!naive || d < *naive) naive = d;
                }
            }
            REQUIRE(lib.has_value() == naive.has_value());
            if (naive) CHECK(*lib == doctest::Approx(*naive).epsilon(1e-9));
        }
    }
}

TEST_CASE("detect_encounters: two singles passing at 800 mm") {
    TimeBin bin = passing_bin(0.0, 800.0);
    FlockAssignment assignment;
    assignment.singles = {1, 2};
    auto events = detect_encounters(bin, assignment, 1500.0, 250.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].type == EncounterType::SS);
    CHECK(events[0].min_distance_mm == doctest::Approx(800.0));
    CHECK(events[0].a.subject_id == 1);
    CHECK(events[0].b.subject_id == 2);
    // Closest approach is when the x positions coincide at x = 10000.
    CHECK(events[0].location_mm.x == doctest::Approx(10000.0));
    CHECK(events[0].location_mm.y == doctest::Approx(2400.0));
}

TEST_CASE("detect_encounters: hysteresis splits a double dip into two events") {
    // One stationary subject, one walker moving away and returning.
    TimeBin bin;
    bin.bin_index = 0;
    std::vector<std::pair<double, double>> still_pos, wander;
    // Distance profile: 1000 (open), 2200 (close: > 1500+250), 1000 (reopen), hold.
    std::vector<double> dist{1000, 1200, 2200, 2400, 2200, 1000, 1200, 1400, 1400, 1400};
    for (std::size_t i = 0; i < dist.size(); ++i) {
        still_pos.push_back({0.0, 0.0});
        wander.push_back({dist[i], 0.0});
    }
    bin.windows.push_back(make_window(1, still_pos, 0, 2.0));
    bin.windows.push_back(make_window(2, wander, 0, 2.0));
    FlockAssignment assignment;
    assignment.singles = {1, 2};

    auto two = detect_encounters(bin, assignment, 1500.0, 250.0);
    CHECK(two.size() == 2);

    // Recovery only to 1600 (< 1750): hysteresis keeps one episode.
    std::vector<double> shallow{1000, 1200, 1600, 1700, 1600, 1000, 1200, 1400, 1400, 1400};
    TimeBin bin2;
    std::vector<std::pair<double, double>> still2, wander2;
    for (std::size_t i = 0; i < shallow.size(); ++i) {
        still2.push_back({0.0, 0.0});
        wander2.push_back({shallow[i], 0.0});
    }
    bin2.windows.push_back(make_window(1, still2, 0, 2.0));
    bin2.windows.push_back(make_window(2, wander2, 0, 2.0));
    auto one = detect_encounters(bin2, assignment, 1500.0, 250.0);
    CHECK(one.size() == 1);
}

TEST_CASE("detect_encounters: planted group with crossing singles typed correctly") {
    TimeBin bin;
    bin.bin_index = 0;
    std::vector<std::pair<double, double>> ga, gb, s1, s2;
    for (int i = 0; i <= 60; ++i) {
        ga.push_back({i * 400.0, 2000.0});
        gb.push_back({i * 400.0, 2600.0});
        s1.push_back({24000.0 - i * 400.0, 2300.0});     // crosses the group head-on
        s2.push_back({i * 400.0 + 100.0, 4800.0});       // distant lane, same direction
    }
    bin.windows.push_back(make_window(10, ga, 0, 2.0, 800.0, 0.0, 0.0));
    bin.windows.push_back(make_window(11, gb, 0, 2.0, 800.0, 0.0, 0.0));
    bin.windows.push_back(make_window(20, s1, 0, 2.0, 800.0, kPi, kPi));
    bin.windows.push_back(make_window(21, s2, 0, 2.0, 800.0, 0.0, 0.0));

    FlockAssignment assignment;
    assignment.groups = {{10, 11}};
    assignment.singles = {20, 21};

    auto events = detect_encounters(bin, assignment, 1500.0, 250.0);
    std::size_t ss = 0, sg = 0, gg = 0;
    for (const auto& ev : events) {
        if (ev.type == EncounterType::SS) ++ss;
        else if (ev.type == EncounterType::SG) ++sg;
        else ++gg;
    }
    // Single 20 meets the group once; single 21 stays > 2 m from everyone
    // except when passing single 20.
    CHECK(sg == 1);
    CHECK(gg == 0);
    for (const auto& ev : events) {
        if (ev.type == EncounterType::SG) {
            CHECK(ev.group_size.has_value());
            CHECK(*ev.group_size == 2);
            CHECK(ev.a.kind == SubjectKind::Single);
            CHECK(ev.b.kind == SubjectKind::Group);
        }
    }
}

TEST_CASE("speed_change and heading_change around t_min") {
    // Walker at 1500 mm/s before t_min, 1200 mm/s after; straight path.
    TimeBin bin;
    std::vector<std::pair<double, double>> pos1, pos2;
    for (int i = 0; i < 40; ++i) {
        pos1.push_back({i * 500.0, 0.0});
        pos2.push_back({i * 500.0, 700.0});
    }
    auto w1 = make_window(1, pos1, 0, 2.0, 1500.0, 0.0, 0.0);
    auto w2 = make_window(2, pos2, 0, 2.0, 1000.0, 0.0, 0.0);
    const std::int64_t t_min = w1.samples[20].t_ms;
    for (std::size_t i = 20; i < w1.samples.size(); ++i) w1.samples[i].speed_mm_s = 1200.0;
    bin.windows = {w1, w2};

    EncounterEvent ev;
    ev.bin_index = 0;
    ev.t_min_ms = t_min;
    ev.a = {SubjectKind::Single, 1, {1}, {}, {}};
    ev.b = {SubjectKind::Single, 2, {2}, {}, {}};

    auto dv = speed_change(ev, ev.a, bin, 10);
    REQUIRE(dv.has_value());
    CHECK(*dv == doctest::Approx(-300.0));

    // Constant-velocity straight walker: both deltas zero.
    auto dv2 = speed_change(ev, ev.b, bin, 10);
    CHECK(*dv2 == doctest::Approx(0.0));
    auto dt2 = heading_change(ev, ev.b, bin, 10);
    CHECK(*dt2 == doctest::Approx(0.0));

    // 90-degree turn at t_min.
    auto w3 = make_window(3, pos1, 0, 2.0, 1000.0, 0.0, 0.0);
    for (std::size_t i = 20; i < w3.samples.size(); ++i) w3.samples[i].motion_angle_rad = kPi / 2;
    TimeBin bin3;
    bin3.windows = {w3};
    EncounterEvent ev3 = ev;
    ev3.a = {SubjectKind::Single, 3, {3}, {}, {}};
    auto dt3 = heading_change(ev3, ev3.a, bin3, 10);
    REQUIRE(dt3.has_value());
    CHECK(*dt3 == doctest::Approx(kPi / 2).epsilon(1e-9));

    // Insufficient pre-samples: t_min at the window start.
    EncounterEvent early = ev;
    early.t_min_ms = w1.samples[0].t_ms;
    CHECK_FALSE(speed_change(early, early.a, bin, 10).has_value());
}

TEST_CASE("heading_change is invariant under global scene rotation") {
    std::mt19937_64 rng(12);
    TimeBin bin;
    auto w = helpers::random_window(1, 30, rng);
    bin.windows = {w};
    EncounterEvent ev;
    ev.t_min_ms = w.samples[15].t_ms;
    ev.a = {SubjectKind::Single, 1, {1}, {}, {}};

    auto base = heading_change(ev, ev.a, bin, 8);
    REQUIRE(base.has_value());

    const double delta = 2.3;
    TimeBin rotated = bin;
    for (auto& s : rotated.windows[0].samples)
        s.motion_angle_rad = wrap_angle(s.motion_angle_rad + delta);
    auto rot = heading_change(ev, ev.a, rotated, 8);
    REQUIRE(rot.has_value());
    CHECK(*rot == doctest::Approx(*base).epsilon(1e-9));
}

TEST_CASE("interaction_timeline zero-fills all types over the covered range") {
    std::vector<EncounterEvent> events(3);
    for (auto& ev : events) {
        ev.type = EncounterType::SS;
        ev.t_min_ms = 30'000;  // minute 0
    }
    auto rows = interaction_timeline(events, 0, 2);
    REQUIRE(rows.size() == 6);  // 2 minutes x 3 types
    CHECK(rows[0].minute == 0);
    CHECK(rows[0].type == EncounterType::SS);
    CHECK(rows[0].count == 3);
    for (const auto& row : rows) {
        if (!(row.minute == 0 && row.type == EncounterType::SS)) CHECK(row.count == 0);
    }

    // Group-by oracle on synthetic events.
    std::mt19937_64 rng(13);
    std::vector<EncounterEvent> mixed;
    std::map<std::pair<std::size_t, EncounterType>, std::size_t> expected;
    std::uniform_int_distribution<int> minute(0, 9);
    std::uniform_int_distribution<int> type_pick(0, 2);
    for (int i = 0; i < 200; ++i) {
        EncounterEvent ev;
        ev.t_min_ms = minute(rng) * 60'000 + 17;
        ev.type = static_cast<EncounterType>(type_pick(rng));
        mixed.push_back(ev);
        ++expected[{static_cast<std::size_t>(ev.t_min_ms / 60'000), ev.type}];
    }
    auto all = interaction_timeline(mixed, 0, 10);
    std::size_t total = 0;
    for (const auto& row : all) {
        auto it = expected.find({row.minute, row.type});
        CHECK(row.count == (it == expected.end() ? 0 : it->second));
        total += row.count;
    }
    CHECK(total == mixed.size());
}

TEST_CASE("groupsize_distance_regression: two-point line, constant, OLS oracle") {
    auto sg_event = [](int size, double dist) {
        EncounterEvent ev;
        ev.type = EncounterType::SG;
        ev.group_size = size;
        ev.min_distance_mm = dist;
        return ev;
    };
    std::vector<EncounterEvent> two{sg_event(2, 1000), sg_event(3, 1200)};
    auto r = groupsize_distance_regression(two);
    REQUIRE(r.has_value());
    CHECK(r->slope == doctest::Approx(200.0));
    CHECK(r->intercept == doctest::Approx(600.0));
    CHECK(r->pearson_r == doctest::Approx(1.0));

    std::vector<EncounterEvent> flat{sg_event(2, 900), sg_event(3, 900), sg_event(4, 900)};
    auto rf = groupsize_distance_regression(flat);
    REQUIRE(rf.has_value());
    CHECK(rf->slope == doctest::Approx(0.0));

    std::vector<EncounterEvent> degenerate{sg_event(2, 900), sg_event(2, 1100)};
    CHECK_FALSE(groupsize_distance_regression(degenerate).has_value());

    std::mt19937_64 rng(14);
    std::uniform_int_distribution<int> size(2, 6);
    std::uniform_real_distribution<double> dist(500.0, 3000.0);
    std::vector<EncounterEvent> cloud;
    std::vector<double> xs, ys;
    for (int i = 0; i < 100; ++i) {
        int s = size(rng);
        double d = dist(rng);
        cloud.push_back(sg_event(s, d));
        xs.push_back(s);
        ys.push_back(d);
    }
    auto rc = groupsize_distance_regression(cloud);
    auto oracle = oracles::ols_normal_equations(xs, ys);
    REQUIRE(rc.has_value());
    CHECK(rc->slope == doctest::Approx(oracle.slope).epsilon(1e-9));
    CHECK(rc->intercept == doctest::Approx(oracle.intercept).epsilon(1e-9));
    CHECK(rc->pearson_r == doctest::Approx(oracle.r).epsilon(1e-9));
}

TEST_CASE("ecdf: basic, ties, count oracle") {
    auto steps = ecdf({1.0, 2.0, 3.0});
    REQUIRE(steps.size() == 3);
    CHECK(steps[0] == std::pair<double, double>{1.0, 1.0 / 3.0});
    CHECK(steps[1] == std::pair<double, double>{2.0, 2.0 / 3.0});
    CHECK(steps[2] == std::pair<double, double>{3.0, 1.0});

    auto tied = ecdf({5.0, 5.0});
    REQUIRE(tied.size() == 1);
    CHECK(tied[0] == std::pair<double, double>{5.0, 1.0});

    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> v(0.0, 10.0);
    std::vector<double> sample;
    for (int i = 0; i < 500; ++i) sample.push_back(std::round(v(rng)));
    auto all = ecdf(sample);
    for (const auto& [value, fraction] : all) {
        std::size_t count = 0;
        for (double s : sample)
            if (s <= value) ++count;
        CHECK(fraction == doctest::Approx(static_cast<double>(count) / sample.size()));
    }
}

TEST_CASE("bin_footprints: SEC contains samples, flock hull covers member hulls") {
    std::mt19937_64 rng(16);
    TimeBin bin;
    for (Pid pid = 1; pid <= 4; ++pid)
        bin.windows.push_back(helpers::random_window(pid, 25, rng));
    FlockAssignment assignment;
    assignment.groups = {{1, 2}};
    assignment.singles = {3, 4};

    auto fps = bin_footprints(bin, assignment, 99);
    REQUIRE(fps.size() == 3);  // 2 singles + 1 group

    double member_hull_max = 0.0;
    for (const auto& fp : fps) {
        // Every sample of every member inside the SEC.
        for (Pid pid : fp.member_pids) {
            for (const auto& w : bin.windows) {
                if (w.pid != pid) continue;
                for (const auto& s : w.samples) {
                    CHECK(distance(fp.sec_center_mm, s.pos()) <= fp.sec_radius_mm + 1e-6);
                }
            }
        }
        CHECK(fp.hull_area_m2 <= kPi * fp.sec_radius_mm * fp.sec_radius_mm * 1e-6 + 1e-9);
        if (fp.kind == SubjectKind::Single && (fp.subject_id == 1 || fp.subject_id == 2))
            member_hull_max = std::max(member_hull_max, fp.hull_area_m2);
    }
    // Group hull over the union of member points >= each member's own hull.
    TimeBin solo_bin = bin;
    FlockAssignment all_single;
    all_single.singles = {1, 2, 3, 4};
    auto solo = bin_footprints(solo_bin, all_single, 99);
    double hull_1 = 0.0, hull_2 = 0.0, group_hull = 0.0;
    for (const auto& fp : solo) {
        if (fp.subject_id == 1) hull_1 = fp.hull_area_m2;
        if (fp.subject_id == 2) hull_2 = fp.hull_area_m2;
    }
    for (const auto& fp : fps)
        if (fp.kind == SubjectKind::Group) group_hull = fp.hull_area_m2;
    CHECK(group_hull >= hull_1 - 1e-12);
    CHECK(group_hull >= hull_2 - 1e-12);
}
