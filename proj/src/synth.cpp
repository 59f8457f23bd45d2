#include "pedflock/synth.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pedflock/angles.hpp"
#include "pedflock/io.hpp"
#include "pedflock/rng.hpp"

namespace pedflock::synth {

namespace {

// Box-Muller on explicit mt19937_64 draws; identical bytes on every platform.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next(double sigma) {
        if (sigma <= 0.0) return 0.0;
        double u1 = std::max(uniform(), 1e-300);
        double u2 = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 rng_;
};

struct EmittedPoint {
    std::int64_t t_ms;
    Pid pid;
    double x, y, speed, motion, facing;
};

void emit_walker(std::vector<EmittedPoint>& out, const ScenarioSpec& spec, GaussianSource& noise,
                 Pid pid, double entry_s, double speed, double lane_y, int direction,
                 double y_offset) {
    const double sigma = spec.noise_sigma_mm;
    const double inset = std::max(200.0, 4.0 * sigma);
    const double x_start = direction > 0 ? inset : spec.corridor_length_mm - inset;
    const double x_stop = direction > 0 ? spec.corridor_length_mm : 0.0;

    std::vector<EmittedPoint> pts;
    for (std::size_t i = 0;; ++i) {
        double dt_s = static_cast<double>(i) * spec.sample_interval_ms / 1000.0;
        double x_true = x_start + direction * speed * dt_s;
        if (direction > 0 ? x_true > x_stop : x_true < x_stop) break;
        EmittedPoint p;
        p.t_ms = spec.t0_ms +
                 static_cast<std::int64_t>(std::llround((entry_s + dt_s) * 1000.0));
        p.pid = pid;
        p.x = x_true + noise.next(sigma);
        p.y = lane_y + y_offset + noise.next(sigma);
        p.speed = speed;
        pts.push_back(p);
    }
    // Motion angle from consecutive noisy positions; the last sample reuses
    // the previous direction. Facing follows motion.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double angle;
        if (pts.size() < 2) {
            angle = direction > 0 ? 0.0 : kPi;
        } else if (i + 1 < pts.size()) {
            angle = std::atan2(pts[i + 1].y - pts[i].y, pts[i + 1].x - pts[i].x);
        } else {
            angle = pts[i - 1].motion;
        }
        pts[i].motion = angle;
        pts[i].facing = angle;
    }
    out.insert(out.end(), pts.begin(), pts.end());
}

}  // namespace

ScenarioOutput generate_synthetic_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    std::set<Pid> seen;
    auto claim = [&seen](Pid pid) {
        if (!seen.insert(pid).second)
            throw std::invalid_argument("scenario pids overlap: " + std::to_string(pid));
    };
    for (const auto& w : spec.singles) claim(w.pid);
    for (const auto& g : spec.groups)
        for (Pid pid : g.pids) claim(pid);

    GaussianSource noise(derive_seed(seed, "synth-noise"));
    std::vector<EmittedPoint> points;
    for (const auto& w : spec.singles)
        emit_walker(points, spec, noise, w.pid, w.entry_s, w.speed_mm_s, w.lane_y_mm,
                    w.direction, 0.0);
    for (const auto& g : spec.groups) {
        const double half = static_cast<double>(g.pids.size() - 1) / 2.0;
        for (std::size_t k = 0; k < g.pids.size(); ++k) {
            double offset = (static_cast<double>(k) - half) * g.lateral_offset_mm;
            emit_walker(points, spec, noise, g.pids[k], g.entry_s, g.speed_mm_s, g.lane_y_mm,
                        g.direction, offset);
        }
    }

    std::ostringstream tracking;
    for (const auto& p : points) {
        tracking << p.t_ms << ',' << p.pid << ',' << io::format_double(p.x) << ','
                 << io::format_double(p.y) << ',' << io::format_double(p.speed) << ','
                 << io::format_double(p.motion) << ',' << io::format_double(p.facing) << "\n";
    }

    std::ostringstream annotations;
    for (const auto& g : spec.groups) {
        for (Pid pid : g.pids) {
            annotations << pid << ' ' << g.pids.size();
            for (Pid other : g.pids)
                if (other != pid) annotations << ' ' << other;
            annotations << "\n";
        }
    }

    nlohmann::json geo;
    geo["boundary"] = {{0.0, 0.0},
                       {spec.corridor_length_mm, 0.0},
                       {spec.corridor_length_mm, spec.corridor_width_mm},
                       {0.0, spec.corridor_width_mm}};
    geo["pillars"] = {{{"center", {spec.corridor_length_mm / 3.0, spec.corridor_width_mm / 2.0}},
                       {"radius_mm", 300.0}},
                      {{"center", {2.0 * spec.corridor_length_mm / 3.0,
                                   spec.corridor_width_mm / 2.0}},
                       {"radius_mm", 300.0}}};
    geo["spots"] = nlohmann::json::array();

    return {tracking.str(), annotations.str(), geo.dump(2) + "\n"};
}

ScenarioSpec make_default_scenario(std::size_t n_pairs, std::size_t n_singles,
                                   double lateral_offset_mm, double noise_sigma_mm) {
    ScenarioSpec spec;
    spec.noise_sigma_mm = noise_sigma_mm;

    // Entry cadences share the residue structure 57 = 3 * 19, which keeps
    // every single at least 9 s away from every pair entry; pairs hold the
    // middle lane band, singles the outer lanes. Same-direction singles in
    // nearby lanes never enter back to back, so nothing shadows anything.
    for (std::size_t i = 0; i < n_pairs; ++i) {
        GroupSpec g;
        g.pids = {static_cast<Pid>(100 + 2 * i), static_cast<Pid>(101 + 2 * i)};
        g.entry_s = 20.0 + 57.0 * static_cast<double>(i);
        g.speed_mm_s = 1250.0 + 35.0 * static_cast<double>(i % 8);
        g.lane_y_mm = 1700.0 + 210.0 * static_cast<double>(i % 8);
        g.direction = i % 2 == 0 ? 1 : -1;
        g.lateral_offset_mm = lateral_offset_mm;
        spec.groups.push_back(g);
    }
    // Singles walk a slower speed band than the pairs, so speed difference
    // alone separates any single from any pair member within a bin.
    constexpr double kOuterLanes[4] = {500.0, 4100.0, 900.0, 4500.0};
    for (std::size_t j = 0; j < n_singles; ++j) {
        WalkerSpec w;
        w.pid = static_cast<Pid>(1 + j);
        w.entry_s = 11.0 + 19.0 * static_cast<double>(j);
        w.speed_mm_s = 700.0 + 40.0 * static_cast<double>(j % 6);
        w.lane_y_mm = kOuterLanes[j % 4];
        w.direction = j % 2 == 0 ? 1 : -1;
        spec.singles.push_back(w);
    }
    return spec;
}

ScenarioSpec read_scenario(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scenario file is not valid JSON: ") + e.what());
    }
    ScenarioSpec spec;
    spec.corridor_length_mm = doc.value("corridor_length_mm", spec.corridor_length_mm);
    spec.corridor_width_mm = doc.value("corridor_width_mm", spec.corridor_width_mm);
    spec.sample_interval_ms = doc.value("sample_interval_ms", spec.sample_interval_ms);
    spec.noise_sigma_mm = doc.value("noise_sigma_mm", spec.noise_sigma_mm);
    spec.t0_ms = doc.value("t0_ms", spec.t0_ms);
    for (const auto& s : doc.value("singles", nlohmann::json::array())) {
        WalkerSpec w;
        w.pid = s.at("pid").get<Pid>();
        w.entry_s = s.at("entry_s").get<double>();
        w.speed_mm_s = s.at("speed_mm_s").get<double>();
        w.lane_y_mm = s.at("lane_y_mm").get<double>();
        w.direction = s.value("direction", 1);
        spec.singles.push_back(w);
    }
    for (const auto& g : doc.value("groups", nlohmann::json::array())) {
        GroupSpec gs;
        for (const auto& pid : g.at("pids")) gs.pids.push_back(pid.get<Pid>());
        gs.entry_s = g.at("entry_s").get<double>();
        gs.speed_mm_s = g.at("speed_mm_s").get<double>();
        gs.lane_y_mm = g.at("lane_y_mm").get<double>();
        gs.direction = g.value("direction", 1);
        gs.lateral_offset_mm = g.value("lateral_offset_mm", 600.0);
        spec.groups.push_back(gs);
    }
    return spec;
}

}  // namespace pedflock::synth
