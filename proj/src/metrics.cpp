#include "pedflock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "pedflock/angles.hpp"

namespace pedflock {

std::string to_string(SubjectKind kind) {
    return kind == SubjectKind::Single ? "SINGLE" : "GROUP";
}

std::string to_string(EncounterType type) {
    switch (type) {
        case EncounterType::SS: return "S-S";
        case EncounterType::SG: return "S-G";
        case EncounterType::GG: return "G-G";
    }
    return "?";
}

namespace {

bool window_covers(const TrajectoryWindow& w, std::int64_t t_ms) {
    return t_ms >= w.start_ms() && t_ms <= w.end_ms();
}

// Position at t by linear interpolation between the bracketing samples.
std::optional<Vec2> window_pos_at(const TrajectoryWindow& w, std::int64_t t_ms) {
    if (!window_covers(w, t_ms)) return std::nullopt;
    auto it = std::lower_bound(w.samples.begin(), w.samples.end(), t_ms,
                               [](const TrajectoryPoint& p, std::int64_t t) { return p.t_ms < t; });
    if (it->t_ms == t_ms) return it->pos();
    const TrajectoryPoint& b = *it;
    const TrajectoryPoint& a = *(it - 1);
    double f = static_cast<double>(t_ms - a.t_ms) / static_cast<double>(b.t_ms - a.t_ms);
    return Vec2{a.x_mm + f * (b.x_mm - a.x_mm), a.y_mm + f * (b.y_mm - a.y_mm)};
}

const TrajectoryWindow* find_window(const TimeBin& bin, Pid pid) {
    for (const auto& w : bin.windows) {
        if (w.pid == pid) return &w;
    }
    return nullptr;
}

}  // namespace

HeatmapGrid accumulate_heatmap(std::span<const Vec2> points_mm,
                               const EnvironmentGeometry& geometry, double cell_mm) {
    if (cell_mm <= 0.0) throw std::invalid_argument("accumulate_heatmap: cell_mm must be > 0");
    HeatmapGrid grid;
    grid.cell_mm = cell_mm;
    BoundingBox bb = bounding_box(geometry.boundary_mm);
    grid.origin_mm = bb.min;
    grid.nx = static_cast<std::size_t>((bb.max.x - bb.min.x) / cell_mm) + 1;
    grid.ny = static_cast<std::size_t>((bb.max.y - bb.min.y) / cell_mm) + 1;
    grid.counts.assign(grid.nx * grid.ny, 0);

    for (const Vec2& p : points_mm) {
        if (!point_in_polygon(p, geometry.boundary_mm)) continue;
        auto ix = static_cast<std::size_t>(std::floor((p.x - grid.origin_mm.x) / cell_mm));
        auto iy = static_cast<std::size_t>(std::floor((p.y - grid.origin_mm.y) / cell_mm));
        ix = std::min(ix, grid.nx - 1);
        iy = std::min(iy, grid.ny - 1);
        ++grid.counts[iy * grid.nx + ix];
        ++grid.total;
    }
    return grid;
}

double trajectory_straightness(const TrajectoryWindow& window) {
    if (window.samples.size() < 2)
        throw std::invalid_argument("trajectory_straightness: need at least 2 samples");
    double path = 0.0;
    for (std::size_t i = 1; i < window.samples.size(); ++i)
        path += distance(window.samples[i - 1].pos(), window.samples[i].pos());
    if (path == 0.0) return 1.0;  // stationary agent is trivially straight
    double chord = distance(window.samples.front().pos(), window.samples.back().pos());
    return std::min(chord / path, 1.0);
}

std::optional<double> clearance_radius(const TimeBin& bin, Pid pid, std::int64_t t_ms) {
    const TrajectoryWindow* own = find_window(bin, pid);
    if (own == nullptr) throw std::invalid_argument("clearance_radius: pid not in bin");
    auto own_pos = window_pos_at(*own, t_ms);
    if (!own_pos) return std::nullopt;

    std::optional<double> best;
    for (const auto& w : bin.windows) {
        if (w.pid == pid) continue;
        auto pos = window_pos_at(w, t_ms);
        if (!pos) continue;
        double d = distance(*own_pos, *pos);
        if (!best || d < *best) best = d;
    }
    return best;
}

namespace {

struct Subject {
    SubjectKind kind;
    std::int64_t id;
    std::vector<const TrajectoryWindow*> members;
};

std::vector<Subject> make_subjects(const TimeBin& bin, const FlockAssignment& assignment) {
    std::vector<Subject> subjects;
    for (Pid pid : assignment.singles) {
        if (const auto* w = find_window(bin, pid))
            subjects.push_back({SubjectKind::Single, pid, {w}});
    }
    for (std::size_t g = 0; g < assignment.groups.size(); ++g) {
        Subject s{SubjectKind::Group, static_cast<std::int64_t>(g), {}};
        for (Pid pid : assignment.groups[g]) {
            if (const auto* w = find_window(bin, pid)) s.members.push_back(w);
        }
        if (!s.members.empty()) subjects.push_back(std::move(s));
    }
    return subjects;
}

struct SubjectDistance {
    double d = std::numeric_limits<double>::infinity();
    Vec2 midpoint;
    bool defined = false;
};

SubjectDistance subject_distance(const Subject& a, const Subject& b, std::int64_t t_ms) {
    SubjectDistance best;
    for (const auto* wa : a.members) {
        auto pa = window_pos_at(*wa, t_ms);
        if (!pa) continue;
        for (const auto* wb : b.members) {
            auto pb = window_pos_at(*wb, t_ms);
            if (!pb) continue;
            double d = distance(*pa, *pb);
            if (!best.defined || d < best.d) {
                best.d = d;
                best.midpoint = (*pa + *pb) * 0.5;
                best.defined = true;
            }
        }
    }
    return best;
}

}  // namespace

std::vector<EncounterEvent> detect_encounters(const TimeBin& bin,
                                              const FlockAssignment& assignment,
                                              double d_enc_mm, double hysteresis_mm) {
    if (d_enc_mm <= 0.0) throw std::invalid_argument("detect_encounters: d_enc must be > 0");
    std::vector<Subject> subjects = make_subjects(bin, assignment);
    std::vector<EncounterEvent> events;

    for (std::size_t i = 0; i < subjects.size(); ++i) {
        for (std::size_t j = i + 1; j < subjects.size(); ++j) {
            const Subject& sa = subjects[i];
            const Subject& sb = subjects[j];

            std::vector<std::int64_t> grid;
            for (const auto* w : sa.members)
                for (const auto& s : w->samples) grid.push_back(s.t_ms);
            for (const auto* w : sb.members)
                for (const auto& s : w->samples) grid.push_back(s.t_ms);
            std::sort(grid.begin(), grid.end());
            grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

            bool open = false;
            EncounterEvent ev;
            auto flush = [&]() {
                if (!open) return;
                open = false;
                ev.bin_index = bin.bin_index;
                ev.a = {sa.kind, sa.id, {}, std::nullopt, std::nullopt};
                ev.b = {sb.kind, sb.id, {}, std::nullopt, std::nullopt};
                for (const auto* w : sa.members) ev.a.member_pids.push_back(w->pid);
                for (const auto* w : sb.members) ev.b.member_pids.push_back(w->pid);
                if (sa.kind == SubjectKind::Single && sb.kind == SubjectKind::Single) {
                    ev.type = EncounterType::SS;
                } else if (sa.kind == SubjectKind::Group && sb.kind == SubjectKind::Group) {
                    ev.type = EncounterType::GG;
                } else {
                    ev.type = EncounterType::SG;
                    ev.group_size = static_cast<int>(
                        (sa.kind == SubjectKind::Group ? sa : sb).members.size());
                }
                events.push_back(ev);
            };

            for (std::int64_t t : grid) {
                SubjectDistance sd = subject_distance(sa, sb, t);
                if (!sd.defined) {
                    flush();  // overlap window ended
                    continue;
                }
                if (!open) {
                    if (sd.d < d_enc_mm) {
                        open = true;
                        ev.t_min_ms = t;
                        ev.min_distance_mm = sd.d;
                        ev.location_mm = sd.midpoint;
                    }
                    continue;
                }
                if (sd.d < ev.min_distance_mm) {
                    ev.t_min_ms = t;
                    ev.min_distance_mm = sd.d;
                    ev.location_mm = sd.midpoint;
                }
                if (sd.d > d_enc_mm + hysteresis_mm) flush();
            }
            flush();
        }
    }
    return events;
}

namespace {

// Index of the sample nearest t_ms; first index wins ties.
std::size_t nearest_sample_index(const TrajectoryWindow& w, std::int64_t t_ms) {
    auto it = std::lower_bound(w.samples.begin(), w.samples.end(), t_ms,
                               [](const TrajectoryPoint& p, std::int64_t t) { return p.t_ms < t; });
    if (it == w.samples.begin()) return 0;
    if (it == w.samples.end()) return w.samples.size() - 1;
    auto prev = it - 1;
    std::int64_t d_prev = t_ms - prev->t_ms;
    std::int64_t d_next = it->t_ms - t_ms;
    return d_prev <= d_next ? static_cast<std::size_t>(prev - w.samples.begin())
                            : static_cast<std::size_t>(it - w.samples.begin());
}

struct SampleSplit {
    std::size_t pre_begin, pre_end;   // [pre_begin, pre_end): strictly before t_min
    std::size_t post_begin, post_end; // [post_begin, post_end): from t_min onward
    bool valid = false;
};

SampleSplit split_around(const TrajectoryWindow& w, std::int64_t t_min_ms, int window) {
    SampleSplit sp;
    std::size_t anchor = nearest_sample_index(w, t_min_ms);
    const std::size_t n = w.samples.size();
    const auto wsz = static_cast<std::size_t>(window);
    sp.pre_end = anchor;
    sp.pre_begin = anchor >= wsz ? anchor - wsz : 0;
    sp.post_begin = anchor;
    sp.post_end = std::min(n, anchor + wsz);
    sp.valid = sp.pre_end > sp.pre_begin && sp.post_end > sp.post_begin;
    return sp;
}

std::optional<double> member_delta_v(const TrajectoryWindow& w, std::int64_t t_min_ms,
                                     int window) {
    SampleSplit sp = split_around(w, t_min_ms, window);
    if (!sp.valid) return std::nullopt;
    double pre = 0.0, post = 0.0;
    for (std::size_t i = sp.pre_begin; i < sp.pre_end; ++i) pre += w.samples[i].speed_mm_s;
    for (std::size_t i = sp.post_begin; i < sp.post_end; ++i) post += w.samples[i].speed_mm_s;
    pre /= static_cast<double>(sp.pre_end - sp.pre_begin);
    post /= static_cast<double>(sp.post_end - sp.post_begin);
    return post - pre;
}

struct HeadingPair {
    double pre, post;
};

std::optional<HeadingPair> member_headings(const TrajectoryWindow& w, std::int64_t t_min_ms,
                                           int window) {
    SampleSplit sp = split_around(w, t_min_ms, window);
    if (!sp.valid) return std::nullopt;
    std::vector<double> pre_angles, post_angles;
    for (std::size_t i = sp.pre_begin; i < sp.pre_end; ++i)
        pre_angles.push_back(w.samples[i].motion_angle_rad);
    for (std::size_t i = sp.post_begin; i < sp.post_end; ++i)
        post_angles.push_back(w.samples[i].motion_angle_rad);
    auto pre = circular_mean(pre_angles);
    auto post = circular_mean(post_angles);
    if (!pre || !post) return std::nullopt;
    return HeadingPair{*pre, *post};
}

}  // namespace

std::optional<double> speed_change(const EncounterEvent& event,
                                   const EncounterParticipant& participant, const TimeBin& bin,
                                   int w) {
    if (w <= 0) throw std::invalid_argument("speed_change: window must be > 0");
    double acc = 0.0;
    std::size_t n = 0;
    for (Pid pid : participant.member_pids) {
        const TrajectoryWindow* win = find_window(bin, pid);
        if (win == nullptr) continue;
        if (auto dv = member_delta_v(*win, event.t_min_ms, w)) {
            acc += *dv;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
}

std::optional<double> heading_change(const EncounterEvent& event,
                                     const EncounterParticipant& participant,
                                     const TimeBin& bin, int w) {
    if (w <= 0) throw std::invalid_argument("heading_change: window must be > 0");
    std::vector<double> pre_means, post_means;
    for (Pid pid : participant.member_pids) {
        const TrajectoryWindow* win = find_window(bin, pid);
        if (win == nullptr) continue;
        if (auto hp = member_headings(*win, event.t_min_ms, w)) {
            pre_means.push_back(hp->pre);
            post_means.push_back(hp->post);
        }
    }
    if (pre_means.empty()) return std::nullopt;
    auto pre = circular_mean(pre_means);
    auto post = circular_mean(post_means);
    if (!pre || !post) return std::nullopt;
    return angle_abs_diff(*post, *pre);
}

void annotate_encounter_kinematics(std::vector<EncounterEvent>& events, const TimeBin& bin,
                                   int w) {
    for (auto& ev : events) {
        ev.a.delta_v_mm_s = speed_change(ev, ev.a, bin, w);
        ev.a.delta_theta_rad = heading_change(ev, ev.a, bin, w);
        ev.b.delta_v_mm_s = speed_change(ev, ev.b, bin, w);
        ev.b.delta_theta_rad = heading_change(ev, ev.b, bin, w);
    }
}

std::vector<TimelineRow> interaction_timeline(std::span<const EncounterEvent> events,
                                              std::int64_t t_origin_ms,
                                              std::size_t minute_bins) {
    std::size_t minutes = minute_bins;
    for (const auto& ev : events) {
        if (ev.t_min_ms < t_origin_ms) continue;
        auto m = static_cast<std::size_t>((ev.t_min_ms - t_origin_ms) / 60000);
        minutes = std::max(minutes, m + 1);
    }
    std::map<std::pair<std::size_t, EncounterType>, std::size_t> counts;
    for (const auto& ev : events) {
        if (ev.t_min_ms < t_origin_ms) continue;
        auto m = static_cast<std::size_t>((ev.t_min_ms - t_origin_ms) / 60000);
        ++counts[{m, ev.type}];
    }
    std::vector<TimelineRow> rows;
    rows.reserve(minutes * 3);
    for (std::size_t m = 0; m < minutes; ++m) {
        for (EncounterType t : {EncounterType::SS, EncounterType::SG, EncounterType::GG}) {
            auto it = counts.find({m, t});
            rows.push_back({m, t, it == counts.end() ? 0 : it->second});
        }
    }
    return rows;
}

std::optional<RegressionResult> groupsize_distance_regression(
    std::span<const EncounterEvent> events) {
    std::vector<double> x, y;
    for (const auto& ev : events) {
        if (ev.type != EncounterType::SG || !ev.group_size) continue;
        x.push_back(static_cast<double>(*ev.group_size));
        y.push_back(ev.min_distance_mm);
    }
    if (x.size() < 2) return std::nullopt;

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return std::nullopt;  // single distinct group size

    RegressionResult r;
    r.n_events = x.size();
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    return r;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("ecdf: empty input");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;  // collapse ties
        out.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

std::vector<SpatialFootprint> bin_footprints(const TimeBin& bin,
                                             const FlockAssignment& assignment,
                                             std::uint64_t sec_seed) {
    std::vector<SpatialFootprint> out;

    auto build = [&](SubjectKind kind, std::int64_t id, std::span<const Pid> members) {
        SpatialFootprint fp;
        fp.bin_index = bin.bin_index;
        fp.kind = kind;
        fp.subject_id = id;

        std::vector<Vec2> points;
        double straightness_sum = 0.0;
        std::size_t straightness_n = 0;
        bool all_stationary = true;
        double clearance_sum = 0.0;
        std::size_t clearance_n = 0;
        std::optional<double> clearance_min;

        for (Pid pid : members) {
            const TrajectoryWindow* w = find_window(bin, pid);
            if (w == nullptr) continue;
            fp.member_pids.push_back(pid);
            for (const auto& s : w->samples) points.push_back(s.pos());
            double st = trajectory_straightness(*w);
            straightness_sum += st;
            ++straightness_n;

            double path = 0.0;
            for (std::size_t i = 1; i < w->samples.size(); ++i)
                path += distance(w->samples[i - 1].pos(), w->samples[i].pos());
            if (path > 0.0) all_stationary = false;

            for (const auto& s : w->samples) {
                if (auto c = clearance_radius(bin, pid, s.t_ms)) {
                    clearance_sum += *c;
                    ++clearance_n;
                    if (!clearance_min || *c < *clearance_min) clearance_min = *c;
                }
            }
        }
        if (points.empty()) return;

        fp.hull_area_m2 = convex_hull_area_m2(points);
        Circle sec = smallest_enclosing_circle(points, sec_seed);
        fp.sec_center_mm = sec.center;
        fp.sec_radius_mm = sec.radius;
        fp.straightness = straightness_n ? straightness_sum / straightness_n : 0.0;
        fp.stationary = all_stationary;
        fp.min_clearance_mm = clearance_min;
        if (clearance_n > 0) fp.mean_clearance_mm = clearance_sum / clearance_n;
        out.push_back(std::move(fp));
    };

    for (Pid pid : assignment.singles) build(SubjectKind::Single, pid, {&pid, 1});
    for (std::size_t g = 0; g < assignment.groups.size(); ++g)
        build(SubjectKind::Group, static_cast<std::int64_t>(g), assignment.groups[g]);
    return out;
}

}  // namespace pedflock
