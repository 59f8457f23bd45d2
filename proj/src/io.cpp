#include "pedflock/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pedflock/errors.hpp"
#include "pedflock/version.hpp"

namespace pedflock::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find(',', start);
        if (end == std::string::npos) end = line.size();
        std::string tok = line.substr(start, end - start);
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
        out.push_back(std::move(tok));
        if (end == line.size()) break;
        start = end + 1;
    }
    return out;
}

double to_double(const std::string& tok, const char* what) {
    double v;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw InputError(std::string("bad numeric field for ") + what + ": '" + tok + "'");
    return v;
}

std::int64_t to_int(const std::string& tok, const char* what) {
    std::int64_t v;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw InputError(std::string("bad integer field for ") + what + ": '" + tok + "'");
    return v;
}

// Lines in our own artifacts: skip comments/blanks, fail on surprises.
template <class RowFn>
void for_each_row(std::istream& in, std::optional<Meta>& meta, RowFn&& fn) {
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '\r') continue;
        if (line[0] == '#') {
            if (!meta) meta = parse_meta_line(line);
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        fn(split_csv(line));
    }
    if (in.bad()) throw InputError("stream failed mid-read");
}

}  // namespace

std::string format_double(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == v) {
        // Prefer the shortest representation that still round-trips.
        for (int prec = 1; prec < 17; ++prec) {
            char s[32];
            std::snprintf(s, sizeof(s), "%.*g", prec, v);
            std::from_chars(s, s + std::strlen(s), back);
            if (back == v) return s;
        }
    }
    return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path.string());
    return out;
}

std::string meta_line(const std::string& artifact,
                      const std::map<std::string, std::string>& params) {
    std::string line = "# pedflock " + artifact + " v1";
    for (const auto& [k, v] : params) line += "; " + k + "=" + v;
    return line;
}

std::optional<Meta> parse_meta_line(const std::string& line) {
    const std::string prefix = "# pedflock ";
    if (line.rfind(prefix, 0) != 0) return std::nullopt;
    Meta meta;
    std::size_t pos = prefix.size();
    std::size_t semi = line.find(';', pos);
    std::string head = line.substr(pos, (semi == std::string::npos ? line.size() : semi) - pos);
    std::size_t space = head.find(' ');
    meta.artifact = head.substr(0, space);
    while (semi != std::string::npos) {
        std::size_t start = semi + 1;
        semi = line.find(';', start);
        std::string kv =
            line.substr(start, (semi == std::string::npos ? line.size() : semi) - start);
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string k = kv.substr(0, eq);
        std::string v = kv.substr(eq + 1);
        while (!k.empty() && k.front() == ' ') k.erase(k.begin());
        while (!v.empty() && v.back() == '\r') v.pop_back();
        meta.params[k] = v;
    }
    return meta;
}

// --- bins -------------------------------------------------------------------

void write_bins(std::ostream& out, const BinningResult& binning, double rate_hz,
                std::size_t seq_len) {
    out << meta_line("bins", {{"rate_hz", format_double(rate_hz)},
                              {"interval_ms", std::to_string(binning.interval_ms)},
                              {"origin_ms", std::to_string(binning.origin_ms)},
                              {"n_bins", std::to_string(binning.bins.size())},
                              {"seq_len", std::to_string(seq_len)}})
        << "\n";
    out << "bin_index,pid,sample_index,t_ms,x_mm,y_mm,speed_mm_s,motion_angle_rad,"
           "facing_angle_rad\n";
    for (const auto& bin : binning.bins) {
        for (const auto& w : bin.windows) {
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                const auto& s = w.samples[i];
                out << bin.bin_index << ',' << w.pid << ',' << i << ',' << s.t_ms << ','
                    << format_double(s.x_mm) << ',' << format_double(s.y_mm) << ','
                    << format_double(s.speed_mm_s) << ',' << format_double(s.motion_angle_rad)
                    << ',' << format_double(s.facing_angle_rad) << "\n";
            }
        }
    }
}

BinsArtifact read_bins(std::istream& in) {
    std::optional<Meta> meta;
    // (bin_index, pid) -> samples; sample_index keeps file order authoritative.
    std::map<std::pair<int, Pid>, std::vector<std::pair<std::int64_t, TrajectoryPoint>>> rows;

    for_each_row(in, meta, [&](const std::vector<std::string>& f) {
        if (f.size() != 9) throw InputError("bins row must have 9 fields");
        TrajectoryPoint pt;
        int bin_index = static_cast<int>(to_int(f[0], "bin_index"));
        Pid pid = to_int(f[1], "pid");
        std::int64_t sample_index = to_int(f[2], "sample_index");
        pt.t_ms = to_int(f[3], "t_ms");
        pt.x_mm = to_double(f[4], "x_mm");
        pt.y_mm = to_double(f[5], "y_mm");
        pt.speed_mm_s = to_double(f[6], "speed_mm_s");
        pt.motion_angle_rad = to_double(f[7], "motion_angle_rad");
        pt.facing_angle_rad = to_double(f[8], "facing_angle_rad");
        rows[{bin_index, pid}].emplace_back(sample_index, pt);
    });

    if (!meta || meta->artifact != "bins")
        throw InputError("not a pedflock bins artifact (missing meta line)");

    BinsArtifact out;
    out.rate_hz = to_double(meta->params.at("rate_hz"), "rate_hz");
    out.seq_len = static_cast<std::size_t>(to_int(meta->params.at("seq_len"), "seq_len"));
    out.binning.interval_ms = to_int(meta->params.at("interval_ms"), "interval_ms");
    out.binning.origin_ms = to_int(meta->params.at("origin_ms"), "origin_ms");
    const auto n_bins = static_cast<std::size_t>(to_int(meta->params.at("n_bins"), "n_bins"));

    out.binning.bins.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        auto& bin = out.binning.bins[i];
        bin.bin_index = static_cast<int>(i);
        bin.t_start_ms = out.binning.origin_ms +
                         static_cast<std::int64_t>(i) * out.binning.interval_ms;
        bin.t_end_ms = bin.t_start_ms + out.binning.interval_ms;
    }
    for (auto& [key, samples] : rows) {
        auto [bin_index, pid] = key;
        if (bin_index < 0 || static_cast<std::size_t>(bin_index) >= n_bins)
            throw InputError("bins row references a bin outside the covered range");
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        TrajectoryWindow w;
        w.pid = pid;
        w.bin_index = bin_index;
        w.rate_hz = out.rate_hz;
        for (auto& [idx, pt] : samples) w.samples.push_back(pt);
        out.binning.bins[bin_index].windows.push_back(std::move(w));
    }
    return out;
}

// --- features ----------------------------------------------------------------

void write_features(std::ostream& out, std::span<const PairRecord> records) {
    out << meta_line("features") << "\n";
    out << "bin_index,pid_a,pid_b";
    for (auto name : kFeatureNames) out << ',' << name;
    out << "\n";
    for (const auto& rec : records) {
        out << rec.key.bin_index << ',' << rec.key.pid_a << ',' << rec.key.pid_b;
        for (double v : rec.features.as_array()) out << ',' << format_double(v);
        out << "\n";
    }
}

std::vector<PairRecord> read_features(std::istream& in) {
    std::optional<Meta> meta;
    std::vector<PairRecord> out;
    for_each_row(in, meta, [&](const std::vector<std::string>& f) {
        if (f.size() != 9) throw InputError("features row must have 9 fields");
        PairRecord rec;
        rec.key.bin_index = static_cast<int>(to_int(f[0], "bin_index"));
        rec.key.pid_a = to_int(f[1], "pid_a");
        rec.key.pid_b = to_int(f[2], "pid_b");
        if (rec.key.pid_a > rec.key.pid_b) std::swap(rec.key.pid_a, rec.key.pid_b);
        rec.features.mean_inter_distance_mm = to_double(f[3], "mean_inter_distance_mm");
        rec.features.start_time_diff_s = to_double(f[4], "start_time_diff_s");
        rec.features.mean_speed_diff_mm_s = to_double(f[5], "mean_speed_diff_mm_s");
        rec.features.motion_angle_diff_rad = to_double(f[6], "motion_angle_diff_rad");
        rec.features.facing_angle_diff_rad = to_double(f[7], "facing_angle_diff_rad");
        rec.features.dtw_distance_mm = to_double(f[8], "dtw_distance_mm");
        out.push_back(rec);
    });
    return out;
}

// --- scores -------------------------------------------------------------------

void write_scores(std::ostream& out, std::span<const PairScore> scores) {
    out << meta_line("scores") << "\n";
    out << "bin_index,pid_a,pid_b,probability\n";
    for (const auto& s : scores) {
        out << s.bin_index << ',' << s.pid_a << ',' << s.pid_b << ','
            << format_double(s.probability) << "\n";
    }
}

std::vector<PairScore> read_scores(std::istream& in) {
    std::optional<Meta> meta;
    std::vector<PairScore> out;
    for_each_row(in, meta, [&](const std::vector<std::string>& f) {
        if (f.size() != 4) throw InputError("scores row must have 4 fields");
        PairScore s;
        s.bin_index = static_cast<int>(to_int(f[0], "bin_index"));
        s.pid_a = to_int(f[1], "pid_a");
        s.pid_b = to_int(f[2], "pid_b");
        s.probability = to_double(f[3], "probability");
        if (s.probability < 0.0 || s.probability > 1.0)
            throw InputError("score probability outside [0,1]");
        if (s.pid_a > s.pid_b) std::swap(s.pid_a, s.pid_b);
        out.push_back(s);
    });
    return out;
}

// --- assignments ----------------------------------------------------------------

void write_assignments(std::ostream& out, std::span<const FlockAssignment> assignments) {
    out << meta_line("assignments") << "\n";
    out << "bin_index,pid,label,flock_id\n";
    for (const auto& a : assignments) {
        for (std::size_t g = 0; g < a.groups.size(); ++g) {
            for (Pid pid : a.groups[g])
                out << a.bin_index << ',' << pid << ",GROUP," << g << "\n";
        }
        for (Pid pid : a.singles) out << a.bin_index << ',' << pid << ",SINGLE,\n";
    }
}

std::vector<FlockAssignment> read_assignments(std::istream& in) {
    std::optional<Meta> meta;
    std::map<int, std::map<std::int64_t, std::vector<Pid>>> groups;
    std::map<int, std::vector<Pid>> singles;
    for_each_row(in, meta, [&](const std::vector<std::string>& f) {
        if (f.size() != 4) throw InputError("assignments row must have 4 fields");
        int bin_index = static_cast<int>(to_int(f[0], "bin_index"));
        Pid pid = to_int(f[1], "pid");
        if (f[2] == "GROUP") {
            groups[bin_index][to_int(f[3], "flock_id")].push_back(pid);
        } else if (f[2] == "SINGLE") {
            singles[bin_index].push_back(pid);
        } else {
            throw InputError("assignment label must be GROUP or SINGLE, got '" + f[2] + "'");
        }
    });

    std::vector<FlockAssignment> out;
    std::set<int> bins;
    for (const auto& [b, _] : groups) bins.insert(b);
    for (const auto& [b, _] : singles) bins.insert(b);
    for (int b : bins) {
        FlockAssignment a;
        a.bin_index = b;
        if (auto it = groups.find(b); it != groups.end()) {
            for (auto& [fid, members] : it->second) {
                std::sort(members.begin(), members.end());
                a.groups.push_back(members);
            }
            std::sort(a.groups.begin(), a.groups.end(),
                      [](const auto& x, const auto& y) { return x.front() < y.front(); });
        }
        if (auto it = singles.find(b); it != singles.end()) {
            a.singles = it->second;
            std::sort(a.singles.begin(), a.singles.end());
        }
        out.push_back(std::move(a));
    }
    return out;
}

// --- model -----------------------------------------------------------------------

void write_model(std::ostream& out, const PairScoreModel& model) {
    json doc;
    doc["format"] = "pedflock-model-v1";
    doc["weights"] = model.weights;
    doc["bias"] = model.bias;
    doc["feature_means"] = model.standardizer.means;
    doc["feature_stds"] = model.standardizer.stds;
    auto order = json::array();
    for (auto name : kFeatureNames) order.push_back(std::string(name));
    doc["feature_order"] = order;
    doc["metadata"] = {{"rate_hz", model.metadata.rate_hz},
                       {"seq_len", model.metadata.seq_len},
                       {"dtw_convention", model.metadata.dtw_convention},
                       {"seed", model.metadata.seed}};
    out << doc.dump(2) << "\n";
}

PairScoreModel read_model(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "pedflock-model-v1")
        throw InputError("unsupported model format: " + doc.value("format", "(missing)"));

    PairScoreModel model;
    auto load6 = [&](const char* key, std::array<double, 6>& dst) {
        const auto& arr = doc.at(key);
        if (!arr.is_array() || arr.size() != 6)
            throw InputError(std::string(key) + " must be an array of 6 numbers");
        for (std::size_t i = 0; i < 6; ++i) dst[i] = arr[i].get<double>();
    };
    load6("weights", model.weights);
    load6("feature_means", model.standardizer.means);
    load6("feature_stds", model.standardizer.stds);
    model.bias = doc.at("bias").get<double>();
    for (double s : model.standardizer.stds) {
        if (s <= 0.0) throw InputError("model feature_stds must all be positive");
    }
    const auto& md = doc.at("metadata");
    model.metadata.rate_hz = md.value("rate_hz", 0.0);
    model.metadata.seq_len = md.value("seq_len", std::size_t{0});
    model.metadata.dtw_convention = md.value("dtw_convention", "");
    model.metadata.seed = md.value("seed", std::uint64_t{0});
    return model;
}

// --- analysis outputs ----------------------------------------------------------

void write_footprints(std::ostream& out, std::span<const SpatialFootprint> footprints) {
    out << meta_line("footprints") << "\n";
    out << "bin_index,kind,subject_id,members,n_members,hull_area_m2,sec_center_x_mm,"
           "sec_center_y_mm,sec_radius_mm,straightness,stationary,min_clearance_mm,"
           "mean_clearance_mm\n";
    for (const auto& fp : footprints) {
        out << fp.bin_index << ',' << to_string(fp.kind) << ',' << fp.subject_id << ',';
        for (std::size_t i = 0; i < fp.member_pids.size(); ++i) {
            if (i) out << ';';
            out << fp.member_pids[i];
        }
        out << ',' << fp.member_pids.size() << ',' << format_double(fp.hull_area_m2) << ','
            << format_double(fp.sec_center_mm.x) << ',' << format_double(fp.sec_center_mm.y)
            << ',' << format_double(fp.sec_radius_mm) << ',' << format_double(fp.straightness)
            << ',' << (fp.stationary ? 1 : 0) << ',';
        if (fp.min_clearance_mm) out << format_double(*fp.min_clearance_mm);
        out << ',';
        if (fp.mean_clearance_mm) out << format_double(*fp.mean_clearance_mm);
        out << "\n";
    }
}

void write_heatmap(std::ostream& out, const HeatmapGrid& grid) {
    out << meta_line("heatmap", {{"cell_mm", format_double(grid.cell_mm)},
                                 {"origin_x_mm", format_double(grid.origin_mm.x)},
                                 {"origin_y_mm", format_double(grid.origin_mm.y)},
                                 {"nx", std::to_string(grid.nx)},
                                 {"ny", std::to_string(grid.ny)},
                                 {"total", std::to_string(grid.total)}})
        << "\n";
    out << "cell_x,cell_y,count,log10_count\n";
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            std::int64_t c = grid.at(ix, iy);
            if (c < 1) continue;  // log density defined only where occupied
            out << ix << ',' << iy << ',' << c << ','
                << format_double(std::log10(static_cast<double>(c))) << "\n";
        }
    }
}

void write_encounters(std::ostream& out, std::span<const EncounterEvent> events,
                      const std::map<std::string, std::string>& params) {
    out << meta_line("encounters", params) << "\n";
    out << "bin_index,type,kind_a,subject_a,members_a,kind_b,subject_b,members_b,t_min_ms,"
           "min_distance_mm,loc_x_mm,loc_y_mm,group_size,delta_v_a,delta_theta_a,delta_v_b,"
           "delta_theta_b\n";
    auto member_list = [&out](const std::vector<Pid>& pids) {
        for (std::size_t i = 0; i < pids.size(); ++i) {
            if (i) out << ';';
            out << pids[i];
        }
    };
    for (const auto& ev : events) {
        out << ev.bin_index << ',' << to_string(ev.type) << ',' << to_string(ev.a.kind) << ','
            << ev.a.subject_id << ',';
        member_list(ev.a.member_pids);
        out << ',' << to_string(ev.b.kind) << ',' << ev.b.subject_id << ',';
        member_list(ev.b.member_pids);
        out << ',' << ev.t_min_ms << ',' << format_double(ev.min_distance_mm) << ','
            << format_double(ev.location_mm.x) << ',' << format_double(ev.location_mm.y) << ',';
        if (ev.group_size) out << *ev.group_size;
        out << ',';
        if (ev.a.delta_v_mm_s) out << format_double(*ev.a.delta_v_mm_s);
        out << ',';
        if (ev.a.delta_theta_rad) out << format_double(*ev.a.delta_theta_rad);
        out << ',';
        if (ev.b.delta_v_mm_s) out << format_double(*ev.b.delta_v_mm_s);
        out << ',';
        if (ev.b.delta_theta_rad) out << format_double(*ev.b.delta_theta_rad);
        out << "\n";
    }
}

void write_timeline(std::ostream& out, std::span<const TimelineRow> rows) {
    out << meta_line("timeline") << "\n";
    out << "minute,type,count\n";
    for (const auto& row : rows)
        out << row.minute << ',' << to_string(row.type) << ',' << row.count << "\n";
}

void write_ecdf(std::ostream& out, std::span<const std::pair<double, double>> steps) {
    out << meta_line("ecdf") << "\n";
    out << "min_distance_mm,cumulative_fraction\n";
    for (const auto& [v, f] : steps)
        out << format_double(v) << ',' << format_double(f) << "\n";
}

void write_regression(std::ostream& out, const std::optional<RegressionResult>& regression,
                      const std::map<std::string, std::string>& params) {
    json doc;
    doc["artifact"] = "pedflock regression v1";
    for (const auto& [k, v] : params) doc["params"][k] = v;
    doc["defined"] = regression.has_value();
    if (regression) {
        doc["slope_mm_per_member"] = regression->slope;
        doc["intercept_mm"] = regression->intercept;
        doc["pearson_r"] = regression->pearson_r;
        doc["n_events"] = regression->n_events;
    }
    out << doc.dump(2) << "\n";
}

// --- summaries --------------------------------------------------------------------

void write_ingest_report(std::ostream& out, const IngestReport& report) {
    json doc;
    doc["artifact"] = "pedflock ingest-summary v1";
    doc["version"] = std::string(kVersion);
    doc["agents"] = report.summary.agents;
    doc["total_records"] = report.summary.total_records;
    doc["min_records_per_agent"] = report.summary.min_records_per_agent;
    doc["max_records_per_agent"] = report.summary.max_records_per_agent;
    doc["mean_records_per_agent"] = report.summary.mean_records_per_agent;
    if (report.summary.mean_interval_s)
        doc["mean_interval_s"] = *report.summary.mean_interval_s;
    else
        doc["mean_interval_s"] = nullptr;
    doc["duration_h"] = report.summary.duration_h;
    doc["rows_total"] = report.rows_total;
    doc["rows_malformed"] = report.rows_malformed;
    doc["duplicate_points"] = report.duplicate_points;
    doc["boundary_points_removed"] = report.boundary_points_removed;
    doc["boundary_trajectories_dropped"] = report.boundary_trajectories_dropped;
    doc["annotations"] = report.annotations;
    doc["annotation_pairs"] = report.annotation_pairs;
    doc["warnings"] = report.warnings;
    out << doc.dump(2) << "\n";
}

void write_bin_stats(std::ostream& out, const BinStats& stats, std::size_t seq_len,
                     double rate_hz, std::int64_t interval_ms) {
    json doc;
    doc["artifact"] = "pedflock bin-stats v1";
    doc["seq_len"] = seq_len;
    doc["rate_hz"] = rate_hz;
    doc["interval_ms"] = interval_ms;
    doc["total_agents"] = stats.total_agents;
    doc["bins_total"] = stats.bins_total;
    doc["bins_nonempty"] = stats.bins_nonempty;
    doc["min_agents_per_bin"] =
        stats.min_agents_per_bin ? json(*stats.min_agents_per_bin) : json(nullptr);
    doc["max_agents_per_bin"] =
        stats.max_agents_per_bin ? json(*stats.max_agents_per_bin) : json(nullptr);
    doc["mean_agents_per_bin"] =
        stats.mean_agents_per_bin ? json(*stats.mean_agents_per_bin) : json(nullptr);
    out << doc.dump(2) << "\n";
}

void write_flock_summary(std::ostream& out, const FlockSummary& summary) {
    json doc;
    doc["artifact"] = "pedflock flock-summary v1";
    doc["total_agents"] = summary.total_agents;
    doc["flock_agents"] = summary.flock_agents;
    doc["flock_pct"] = summary.flock_pct ? json(*summary.flock_pct) : json(nullptr);
    doc["n_flocks"] = summary.n_flocks;
    doc["detection_runtime_s"] = summary.detection_runtime_s;
    out << doc.dump(2) << "\n";
}

void write_validation(std::ostream& out, const ValidationMetrics& m) {
    json doc;
    doc["artifact"] = "pedflock validation v1";
    doc["pair_precision"] = m.pair_precision;
    doc["pair_recall"] = m.pair_recall;
    doc["pair_f1"] = m.pair_f1;
    doc["agent_precision"] = m.agent_precision;
    doc["agent_recall"] = m.agent_recall;
    doc["pair_precision_defined"] = m.pair_precision_defined;
    doc["pair_recall_defined"] = m.pair_recall_defined;
    doc["agent_precision_defined"] = m.agent_precision_defined;
    doc["agent_recall_defined"] = m.agent_recall_defined;
    doc["pair_tp"] = m.pair_tp;
    doc["pair_fp"] = m.pair_fp;
    doc["pair_fn"] = m.pair_fn;
    doc["agent_tp"] = m.agent_tp;
    doc["agent_fp"] = m.agent_fp;
    doc["agent_fn"] = m.agent_fn;
    out << doc.dump(2) << "\n";
}

}  // namespace pedflock::io
