#include "pedflock/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pedflock/angles.hpp"

namespace pedflock {

namespace {

bool parse_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Splits on the delimiter, trimming surrounding spaces and a trailing \r.
std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find(delim, start);
        if (end == std::string_view::npos) end = line.size();
        std::string_view tok = line.substr(start, end - start);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
        while (!tok.empty() &&
               (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
            tok.remove_suffix(1);
        out.push_back(tok);
        if (end == line.size()) break;
        start = end + 1;
    }
    return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool blank_or_comment(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

TrackingData parse_tracking_csv(std::istream& in) {
    if (!in.good()) throw std::runtime_error("tracking stream is not readable");

    TrackingData out;
    std::string line;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        if (blank_or_comment(line)) continue;
        auto fields = split_fields(line, ',');

        double vals[7];
        bool ok = fields.size() == 7;
        for (std::size_t i = 0; ok && i < 7; ++i) ok = parse_double(fields[i], vals[i]);

        if (first_data_line) {
            first_data_line = false;
            if (!ok) {
                out.stats.header_skipped = true;  // header row, not an error
                continue;
            }
        }
        ++out.stats.rows_total;
        if (!ok || vals[4] < 0.0) {
            ++out.stats.rows_malformed;
            continue;
        }

        TrajectoryPoint pt;
        pt.t_ms = static_cast<std::int64_t>(std::llround(vals[0]));
        Pid pid = static_cast<Pid>(std::llround(vals[1]));
        pt.x_mm = vals[2];
        pt.y_mm = vals[3];
        pt.speed_mm_s = vals[4];
        pt.motion_angle_rad = wrap_angle(vals[5]);
        pt.facing_angle_rad = wrap_angle(vals[6]);

        auto [it, inserted] = out.trajectories.try_emplace(pid);
        if (inserted) it->second.pid = pid;
        it->second.points.push_back(pt);
    }
    if (in.bad()) throw std::runtime_error("tracking stream failed mid-read");

    for (auto& [pid, traj] : out.trajectories) {
        std::stable_sort(traj.points.begin(), traj.points.end(),
                         [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
                             return a.t_ms < b.t_ms;
                         });
        auto last = std::unique(traj.points.begin(), traj.points.end(),
                                [](const TrajectoryPoint& a, const TrajectoryPoint& b) {
                                    return a.t_ms == b.t_ms;
                                });
        out.stats.duplicate_points += std::distance(last, traj.points.end());
        traj.points.erase(last, traj.points.end());
    }
    return out;
}

AnnotationData parse_group_annotations(std::istream& in) {
    if (!in.good()) throw std::runtime_error("annotation stream is not readable");

    AnnotationData out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line)) continue;
        ++out.stats.rows_total;
        auto tokens = split_whitespace(line);

        auto skip = [&](const std::string& why) {
            ++out.stats.rows_malformed;
            out.stats.warnings.push_back("annotation line " + std::to_string(lineno) +
                                         " skipped: " + why);
        };

        std::vector<Pid> ids;
        ids.reserve(tokens.size());
        bool numeric = true;
        for (auto tok : tokens) {
            double v;
            if (!parse_double(tok, v)) {
                numeric = false;
                break;
            }
            ids.push_back(static_cast<Pid>(std::llround(v)));
        }
        if (!numeric || ids.size() < 2) {
            skip("non-numeric or too few fields");
            continue;
        }

        GroupAnnotation ann;
        ann.pid = ids[0];
        ann.group_size = static_cast<int>(ids[1]);
        ann.partner_ids.assign(ids.begin() + 2, ids.end());
        if (ann.group_size < 2 ||
            ann.partner_ids.size() != static_cast<std::size_t>(ann.group_size) - 1) {
            skip("token count does not match group size");
            continue;
        }
        if (std::find(ann.partner_ids.begin(), ann.partner_ids.end(), ann.pid) !=
            ann.partner_ids.end()) {
            skip("pedestrian lists itself as partner");
            continue;
        }
        out.annotations.push_back(std::move(ann));
    }
    if (in.bad()) throw std::runtime_error("annotation stream failed mid-read");
    return out;
}

std::set<PidPair> annotation_pair_set(std::span<const GroupAnnotation> annotations) {
    std::set<PidPair> pairs;
    for (const auto& ann : annotations) {
        for (Pid partner : ann.partner_ids) pairs.insert(make_pair_key(ann.pid, partner));
    }
    return pairs;
}

std::vector<std::string> validate_annotation_reciprocity(
    std::span<const GroupAnnotation> annotations) {
    std::set<std::pair<Pid, Pid>> directed;
    for (const auto& ann : annotations) {
        for (Pid partner : ann.partner_ids) directed.insert({ann.pid, partner});
    }
    std::vector<std::string> issues;
    for (const auto& [a, b] : directed) {
        if (!directed.contains({b, a})) {
            issues.push_back("pair (" + std::to_string(a) + "," + std::to_string(b) +
                             ") listed by " + std::to_string(a) + " only");
        }
    }
    return issues;
}

EnvironmentGeometry parse_environment(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("geometry file is not valid JSON: ") + e.what());
    }

    auto read_point = [](const nlohmann::json& j) -> Vec2 {
        if (!j.is_array() || j.size() != 2)
            throw std::runtime_error("geometry point must be a [x, y] array");
        return {j[0].get<double>(), j[1].get<double>()};
    };

    EnvironmentGeometry geo;
    if (!doc.contains("boundary"))
        throw std::runtime_error("geometry file is missing the boundary polygon");
    for (const auto& v : doc["boundary"]) geo.boundary_mm.push_back(read_point(v));
    if (geo.boundary_mm.size() < 3)
        throw std::runtime_error("boundary polygon needs at least 3 vertices");
    if (!polygon_is_simple(geo.boundary_mm))
        throw std::runtime_error("boundary polygon is self-intersecting");

    for (const auto& p : doc.value("pillars", nlohmann::json::array())) {
        Pillar pillar{read_point(p.at("center")), p.at("radius_mm").get<double>()};
        if (pillar.radius_mm <= 0.0) throw std::runtime_error("pillar radius must be > 0");
        geo.pillars.push_back(pillar);
    }
    for (const auto& s : doc.value("spots", nlohmann::json::array())) {
        geo.spots.push_back(
            {s.at("label").get<std::string>(), read_point(s.at("a")), read_point(s.at("b"))});
    }
    return geo;
}

BoundaryFilterResult filter_to_boundary(const TrajectoryMap& trajectories,
                                        const EnvironmentGeometry& geometry) {
    BoundaryFilterResult out;
    for (const auto& [pid, traj] : trajectories) {
        Trajectory kept;
        kept.pid = pid;
        for (const auto& pt : traj.points) {
            if (point_in_polygon(pt.pos(), geometry.boundary_mm)) {
                kept.points.push_back(pt);
            } else {
                ++out.points_removed;
            }
        }
        if (kept.points.empty()) {
            ++out.trajectories_dropped;
        } else {
            out.trajectories.emplace(pid, std::move(kept));
        }
    }
    return out;
}

DatasetSummary summarize_dataset(const TrajectoryMap& trajectories) {
    DatasetSummary s;
    if (trajectories.empty()) return s;

    s.agents = trajectories.size();
    s.min_records_per_agent = std::numeric_limits<std::size_t>::max();
    std::int64_t t_min = std::numeric_limits<std::int64_t>::max();
    std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
    std::int64_t interval_span_ms = 0;
    std::size_t interval_count = 0;

    for (const auto& [pid, traj] : trajectories) {
        const std::size_t n = traj.points.size();
        s.total_records += n;
        s.min_records_per_agent = std::min(s.min_records_per_agent, n);
        s.max_records_per_agent = std::max(s.max_records_per_agent, n);
        t_min = std::min(t_min, traj.points.front().t_ms);
        t_max = std::max(t_max, traj.points.back().t_ms);
        if (n >= 2) {
            interval_span_ms += traj.points.back().t_ms - traj.points.front().t_ms;
            interval_count += n - 1;
        }
    }
    s.mean_records_per_agent = static_cast<double>(s.total_records) / s.agents;
    if (interval_count > 0)
        s.mean_interval_s = static_cast<double>(interval_span_ms) / interval_count / 1000.0;
    s.duration_h = static_cast<double>(t_max - t_min) / 3.6e6;
    return s;
}

}  // namespace pedflock
