// Command-line front end for the pedflock pipeline. Subcommands mirror the
// pipeline stages; `run` executes all of them from one configuration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pedflock/binning.hpp"
#include "pedflock/classifier.hpp"
#include "pedflock/errors.hpp"
#include "pedflock/flock.hpp"
#include "pedflock/ingest.hpp"
#include "pedflock/io.hpp"
#include "pedflock/metrics.hpp"
#include "pedflock/pairfeat.hpp"
#include "pedflock/pipeline.hpp"
#include "pedflock/rng.hpp"
#include "pedflock/synth.hpp"
#include "pedflock/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pedflock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitStage = 3;

struct IngestArgs {
    std::string tracking, groups, env, summary_out;
};

void run_ingest(const IngestArgs& args) {
    auto tracking_in = io::open_input(args.tracking);
    TrackingData tracking = parse_tracking_csv(tracking_in);
    auto env_in = io::open_input(args.env);
    EnvironmentGeometry geometry = parse_environment(env_in);
    BoundaryFilterResult filtered = filter_to_boundary(tracking.trajectories, geometry);

    io::IngestReport report;
    report.summary = summarize_dataset(filtered.trajectories);
    report.rows_total = tracking.stats.rows_total;
    report.rows_malformed = tracking.stats.rows_malformed;
    report.duplicate_points = tracking.stats.duplicate_points;
    report.boundary_points_removed = filtered.points_removed;
    report.boundary_trajectories_dropped = filtered.trajectories_dropped;

    if (!args.groups.empty()) {
        auto groups_in = io::open_input(args.groups);
        AnnotationData ann = parse_group_annotations(groups_in);
        report.annotations = ann.annotations.size();
        report.annotation_pairs = annotation_pair_set(ann.annotations).size();
        report.warnings = ann.stats.warnings;
        for (const auto& w : validate_annotation_reciprocity(ann.annotations))
            report.warnings.push_back("annotation asymmetry: " + w);
    }
    auto out = io::open_output(args.summary_out);
    io::write_ingest_report(out, report);
    std::cout << "ingest: " << report.summary.agents << " agents, "
              << report.summary.total_records << " records ("
              << report.rows_malformed << " malformed rows skipped)\n";
}

struct BinArgs {
    std::string tracking, env, bins_out, stats_out;
    double interval_s = 60.0;
    std::size_t seq_len = 60;
    double rate_hz = 3.0;
};

void run_bin(const BinArgs& args) {
    auto tracking_in = io::open_input(args.tracking);
    TrackingData tracking = parse_tracking_csv(tracking_in);
    TrajectoryMap trajectories = std::move(tracking.trajectories);
    if (!args.env.empty()) {
        auto env_in = io::open_input(args.env);
        EnvironmentGeometry geometry = parse_environment(env_in);
        trajectories = filter_to_boundary(trajectories, geometry).trajectories;
    }

    TrajectoryMap resampled;
    for (const auto& [pid, traj] : trajectories) {
        Trajectory r = resample_uniform(traj, args.rate_hz);
        if (!r.points.empty()) resampled.emplace(pid, std::move(r));
    }
    auto interval_ms = static_cast<std::int64_t>(args.interval_s * 1000.0);
    BinningResult binning = assign_bins(resampled, interval_ms, args.rate_hz);
    filter_min_length(binning, args.seq_len);
    BinStats stats = bin_stats(binning.bins);

    auto out = io::open_output(args.bins_out);
    io::write_bins(out, binning, args.rate_hz, args.seq_len);
    if (!args.stats_out.empty()) {
        auto stats_out = io::open_output(args.stats_out);
        io::write_bin_stats(stats_out, stats, args.seq_len, args.rate_hz, interval_ms);
    }
    std::cout << "bin: " << stats.total_agents << " eligible agents across "
              << stats.bins_total << " bins\n";
}

struct FeaturesArgs {
    std::string bins, out;
};

void run_features(const FeaturesArgs& args) {
    auto bins_in = io::open_input(args.bins);
    io::BinsArtifact bins = io::read_bins(bins_in);

    std::vector<PairRecord> records;
    std::size_t skipped = 0;
    for (const auto& bin : bins.binning.bins) {
        for (std::size_t i = 0; i < bin.windows.size(); ++i) {
            for (std::size_t j = i + 1; j < bin.windows.size(); ++j) {
                auto features = extract_pair_features(bin.windows[i], bin.windows[j]);
                if (!features) {
                    ++skipped;
                    continue;
                }
                PairRecord rec;
                rec.key.bin_index = bin.bin_index;
                rec.key.pid_a = std::min(bin.windows[i].pid, bin.windows[j].pid);
                rec.key.pid_b = std::max(bin.windows[i].pid, bin.windows[j].pid);
                rec.features = *features;
                records.push_back(rec);
            }
        }
    }
    auto out = io::open_output(args.out);
    io::write_features(out, records);
    std::cout << "features: " << records.size() << " pairs (" << skipped << " skipped)\n";
}

struct TrainArgs {
    std::string features, labels_from, model_out, report_out;
    std::uint64_t seed = 0;
    double lr = 0.5;
    int max_epochs = 1000;
    int patience = 25;
    double split_ratio = 0.8;
    double rate_hz = 3.0;
    std::size_t seq_len = 60;
};

void run_train(const TrainArgs& args) {
    auto features_in = io::open_input(args.features);
    std::vector<PairRecord> records = io::read_features(features_in);
    auto groups_in = io::open_input(args.labels_from);
    AnnotationData ann = parse_group_annotations(groups_in);
    std::set<PidPair> pairs = annotation_pair_set(ann.annotations);

    std::vector<std::string> warnings;
    std::vector<LabeledPair> dataset = build_training_set(records, pairs, args.seed, &warnings);
    auto [train, test] = split_train_test(dataset, args.split_ratio, args.seed);

    TrainOptions options;
    options.learning_rate = args.lr;
    options.max_epochs = args.max_epochs;
    options.patience = args.patience;
    options.seed = args.seed;
    ModelMetadata metadata{args.rate_hz, args.seq_len, "accumulated_euclidean", args.seed};
    TrainOutcome outcome = train_logistic(train, options, metadata);

    auto out = io::open_output(args.model_out);
    io::write_model(out, outcome.model);

    nlohmann::json tr;
    tr["artifact"] = "pedflock training-report v1";
    tr["total_samples"] = dataset.size();
    tr["train_samples"] = train.size();
    tr["test_samples"] = test.size();
    tr["epochs_run"] = outcome.report.epochs_run;
    tr["stopped_early"] = outcome.report.stopped_early;
    tr["initial_train_loss"] = outcome.report.initial_train_loss;
    tr["final_train_loss"] = outcome.report.final_train_loss;
    tr["warnings"] = warnings;
    if (!test.empty()) {
        EvalMetrics eval = evaluate(outcome.model, test);
        tr["test_accuracy"] = eval.accuracy;
        tr["test_precision"] = eval.precision;
        tr["test_recall"] = eval.recall;
        tr["test_f1"] = eval.f1;
        std::cout << "train: " << dataset.size() << " samples, test accuracy "
                  << eval.accuracy << "\n";
    } else {
        std::cout << "train: " << dataset.size() << " samples (no test split)\n";
    }
    if (!args.report_out.empty()) {
        auto report_out = io::open_output(args.report_out);
        report_out << tr.dump(2) << "\n";
    }
}

struct ScoreArgs {
    std::string model, features, out;
};

void run_score(const ScoreArgs& args) {
    auto model_in = io::open_input(args.model);
    PairScoreModel model = io::read_model(model_in);
    auto features_in = io::open_input(args.features);
    std::vector<PairRecord> records = io::read_features(features_in);
    std::vector<PairScore> scores = score_pairs(model, records);
    auto out = io::open_output(args.out);
    io::write_scores(out, scores);
    std::cout << "score: " << scores.size() << " pairs scored\n";
}

struct DetectArgs {
    std::string scores, bins, out, summary_out, groups, validation_out;
    double threshold = 0.9;
};

void run_detect(const DetectArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    auto scores_in = io::open_input(args.scores);
    std::vector<PairScore> scores = io::read_scores(scores_in);
    auto bins_in = io::open_input(args.bins);
    io::BinsArtifact bins = io::read_bins(bins_in);

    std::vector<PairScore> confident = threshold_pairs(scores, args.threshold);
    std::map<int, std::vector<PidPair>> edges_by_bin;
    for (const auto& s : confident) edges_by_bin[s.bin_index].push_back({s.pid_a, s.pid_b});

    std::vector<FlockAssignment> assignments;
    for (const auto& bin : bins.binning.bins) {
        std::vector<Pid> members;
        for (const auto& w : bin.windows) members.push_back(w.pid);
        std::sort(members.begin(), members.end());
        static const std::vector<PidPair> kNoEdges;
        auto it = edges_by_bin.find(bin.bin_index);
        assignments.push_back(cluster_edges(
            members, it == edges_by_bin.end() ? kNoEdges : it->second, bin.bin_index));
    }
    auto out = io::open_output(args.out);
    io::write_assignments(out, assignments);

    double runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    FlockSummary summary = flock_summary(assignments, runtime_s);
    if (!args.summary_out.empty()) {
        auto summary_out = io::open_output(args.summary_out);
        io::write_flock_summary(summary_out, summary);
    }
    if (!args.groups.empty()) {
        auto groups_in = io::open_input(args.groups);
        AnnotationData ann = parse_group_annotations(groups_in);
        ValidationMetrics metrics =
            validate_assignment(assignments, annotation_pair_set(ann.annotations));
        if (!args.validation_out.empty()) {
            auto vout = io::open_output(args.validation_out);
            io::write_validation(vout, metrics);
        }
        std::cout << "detect: pair F1 " << metrics.pair_f1 << "\n";
    }
    std::cout << "detect: " << summary.flock_agents << "/" << summary.total_agents
              << " agents in " << summary.n_flocks << " flocks\n";
}

struct AnalyzeArgs {
    std::string assignments, bins, env, out_dir;
    double d_enc = 1500.0;
    double hysteresis = 250.0;
    int window = 15;
    double cell_mm = 500.0;
    std::uint64_t seed = 0;
};

void run_analyze(const AnalyzeArgs& args) {
    auto assignments_in = io::open_input(args.assignments);
    std::vector<FlockAssignment> assignments = io::read_assignments(assignments_in);
    auto bins_in = io::open_input(args.bins);
    io::BinsArtifact bins = io::read_bins(bins_in);
    auto env_in = io::open_input(args.env);
    EnvironmentGeometry geometry = parse_environment(env_in);

    std::map<int, const FlockAssignment*> by_bin;
    for (const auto& a : assignments) by_bin[a.bin_index] = &a;
    static const FlockAssignment kEmpty;

    const std::uint64_t sec_seed = derive_seed(args.seed, "welzl");
    std::vector<SpatialFootprint> footprints;
    std::vector<EncounterEvent> events;
    std::vector<Vec2> all_points;
    std::int64_t t_max = bins.binning.origin_ms;
    for (const auto& bin : bins.binning.bins) {
        auto it = by_bin.find(bin.bin_index);
        FlockAssignment assignment = it == by_bin.end() ? kEmpty : *it->second;
        if (it == by_bin.end()) {
            // No assignment rows for this bin: everyone counts as single.
            for (const auto& w : bin.windows) assignment.singles.push_back(w.pid);
            assignment.bin_index = bin.bin_index;
        }
        for (const auto& w : bin.windows) {
            for (const auto& s : w.samples) all_points.push_back(s.pos());
            if (!w.samples.empty()) t_max = std::max(t_max, w.end_ms());
        }
        auto fp = bin_footprints(bin, assignment, sec_seed);
        footprints.insert(footprints.end(), fp.begin(), fp.end());
        auto ev = detect_encounters(bin, assignment, args.d_enc, args.hysteresis);
        annotate_encounter_kinematics(ev, bin, args.window);
        events.insert(events.end(), ev.begin(), ev.end());
    }

    HeatmapGrid heatmap = accumulate_heatmap(all_points, geometry, args.cell_mm);
    const auto minutes = static_cast<std::size_t>(
        std::max<std::int64_t>(0, (t_max - bins.binning.origin_ms + 59'999) / 60'000));
    std::vector<TimelineRow> timeline =
        interaction_timeline(events, bins.binning.origin_ms, minutes);

    const std::map<std::string, std::string> params = {
        {"d_enc_mm", io::format_double(args.d_enc)},
        {"hysteresis_mm", io::format_double(args.hysteresis)},
        {"delta_window", std::to_string(args.window)}};

    fs::create_directories(args.out_dir);
    {
        auto out = io::open_output(fs::path(args.out_dir) / "footprints.csv");
        io::write_footprints(out, footprints);
    }
    {
        auto out = io::open_output(fs::path(args.out_dir) / "heatmap.csv");
        io::write_heatmap(out, heatmap);
    }
    {
        auto out = io::open_output(fs::path(args.out_dir) / "encounters.csv");
        io::write_encounters(out, events, params);
    }
    {
        auto out = io::open_output(fs::path(args.out_dir) / "timeline.csv");
        io::write_timeline(out, timeline);
    }
    for (EncounterType type : {EncounterType::SS, EncounterType::SG, EncounterType::GG}) {
        std::vector<double> distances;
        for (const auto& ev : events)
            if (ev.type == type) distances.push_back(ev.min_distance_mm);
        auto out = io::open_output(fs::path(args.out_dir) / ("ecdf_" + to_string(type) + ".csv"));
        if (distances.empty()) {
            out << io::meta_line("ecdf") << "\n";
            out << "min_distance_mm,cumulative_fraction\n";
        } else {
            io::write_ecdf(out, ecdf(distances));
        }
    }
    {
        auto out = io::open_output(fs::path(args.out_dir) / "regression.json");
        io::write_regression(out, groupsize_distance_regression(events), params);
    }
    std::cout << "analyze: " << footprints.size() << " footprints, " << events.size()
              << " encounters\n";
}

struct SynthArgs {
    std::string out_dir, scenario;
    std::uint64_t seed = 0;
    std::size_t pairs = 8;
    std::size_t singles = 24;
    double offset_mm = 600.0;
    double noise_mm = 50.0;
};

void run_synth(const SynthArgs& args) {
    synth::ScenarioSpec spec;
    if (!args.scenario.empty()) {
        auto in = io::open_input(args.scenario);
        spec = synth::read_scenario(in);
    } else {
        spec = synth::make_default_scenario(args.pairs, args.singles, args.offset_mm,
                                            args.noise_mm);
    }
    synth::ScenarioOutput out = synth::generate_synthetic_scenario(spec, args.seed);
    fs::create_directories(args.out_dir);
    io::open_output(fs::path(args.out_dir) / "tracking.csv") << out.tracking_csv;
    io::open_output(fs::path(args.out_dir) / "groups.txt") << out.annotations_txt;
    io::open_output(fs::path(args.out_dir) / "env.json") << out.geometry_json;
    std::cout << "synth: " << spec.groups.size() << " groups + " << spec.singles.size()
              << " singles -> " << args.out_dir << "\n";
}

struct RunArgs {
    std::string config_file;
    PipelineConfig config;
    std::string mode = "train";
};

PipelineConfig load_config_file(const std::string& path) {
    auto in = io::open_input(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config file is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    cfg.tracking_path = doc.value("tracking", "");
    cfg.groups_path = doc.value("groups", "");
    cfg.geometry_path = doc.value("geometry", "");
    cfg.out_dir = doc.value("out_dir", "");
    cfg.model_path = doc.value("model", "");
    cfg.external_scores_path = doc.value("external_scores", "");
    cfg.interval_ms = doc.value("interval_ms", cfg.interval_ms);
    cfg.seq_len = doc.value("seq_len", cfg.seq_len);
    cfg.rate_hz = doc.value("rate_hz", cfg.rate_hz);
    cfg.threshold = doc.value("threshold", cfg.threshold);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.max_epochs = doc.value("max_epochs", cfg.max_epochs);
    cfg.patience = doc.value("patience", cfg.patience);
    cfg.split_ratio = doc.value("split_ratio", cfg.split_ratio);
    cfg.d_enc_mm = doc.value("d_enc_mm", cfg.d_enc_mm);
    cfg.hysteresis_mm = doc.value("hysteresis_mm", cfg.hysteresis_mm);
    cfg.delta_window = doc.value("delta_window", cfg.delta_window);
    cfg.cell_mm = doc.value("cell_mm", cfg.cell_mm);
    std::string mode = doc.value("mode", "train");
    if (mode == "train") cfg.mode = ScorerMode::Train;
    else if (mode == "load-model") cfg.mode = ScorerMode::LoadModel;
    else if (mode == "external-scores") cfg.mode = ScorerMode::ExternalScores;
    else throw InputError("config mode must be train|load-model|external-scores");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pedflock: pedestrian flock detection and space-utilization analytics"};
    app.set_version_flag("--version", std::string(pedflock::kVersion));
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse and summarize tracking data");
    ingest_cmd->add_option("--tracking", ingest_args.tracking)->required();
    ingest_cmd->add_option("--groups", ingest_args.groups);
    ingest_cmd->add_option("--env", ingest_args.env)->required();
    ingest_cmd->add_option("--summary-out", ingest_args.summary_out)->required();

    BinArgs bin_args;
    auto* bin_cmd = app.add_subcommand("bin", "resample, bin and length-filter trajectories");
    bin_cmd->add_option("--tracking", bin_args.tracking)->required();
    bin_cmd->add_option("--env", bin_args.env);
    bin_cmd->add_option("--interval-s", bin_args.interval_s);
    bin_cmd->add_option("--seq-len", bin_args.seq_len);
    bin_cmd->add_option("--rate-hz", bin_args.rate_hz);
    bin_cmd->add_option("--bins-out", bin_args.bins_out)->required();
    bin_cmd->add_option("--stats-out", bin_args.stats_out);

    FeaturesArgs features_args;
    auto* features_cmd = app.add_subcommand("features", "pairwise features per bin");
    features_cmd->add_option("--bins", features_args.bins)->required();
    features_cmd->add_option("--out", features_args.out)->required();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the logistic pair scorer");
    train_cmd->add_option("--features", train_args.features)->required();
    train_cmd->add_option("--labels-from", train_args.labels_from)->required();
    train_cmd->add_option("--seed", train_args.seed);
    train_cmd->add_option("--lr", train_args.lr);
    train_cmd->add_option("--max-epochs", train_args.max_epochs);
    train_cmd->add_option("--patience", train_args.patience);
    train_cmd->add_option("--split-ratio", train_args.split_ratio);
    train_cmd->add_option("--rate-hz", train_args.rate_hz);
    train_cmd->add_option("--seq-len", train_args.seq_len);
    train_cmd->add_option("--model-out", train_args.model_out)->required();
    train_cmd->add_option("--report-out", train_args.report_out);

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "score pair features with a model");
    score_cmd->add_option("--model", score_args.model)->required();
    score_cmd->add_option("--features", score_args.features)->required();
    score_cmd->add_option("--out", score_args.out)->required();

    DetectArgs detect_args;
    auto* detect_cmd = app.add_subcommand("detect", "threshold scores and cluster flocks");
    detect_cmd->add_option("--scores", detect_args.scores)->required();
    detect_cmd->add_option("--bins", detect_args.bins)->required();
    detect_cmd->add_option("--threshold", detect_args.threshold);
    detect_cmd->add_option("--out", detect_args.out)->required();
    detect_cmd->add_option("--summary-out", detect_args.summary_out);
    detect_cmd->add_option("--groups", detect_args.groups);
    detect_cmd->add_option("--validation-out", detect_args.validation_out);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "spatial and behavioral metrics");
    analyze_cmd->add_option("--assignments", analyze_args.assignments)->required();
    analyze_cmd->add_option("--bins", analyze_args.bins)->required();
    analyze_cmd->add_option("--env", analyze_args.env)->required();
    analyze_cmd->add_option("--d-enc", analyze_args.d_enc);
    analyze_cmd->add_option("--hysteresis", analyze_args.hysteresis);
    analyze_cmd->add_option("--window", analyze_args.window);
    analyze_cmd->add_option("--cell-mm", analyze_args.cell_mm);
    analyze_cmd->add_option("--seed", analyze_args.seed);
    analyze_cmd->add_option("--out-dir", analyze_args.out_dir)->required();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corridor scenario");
    synth_cmd->add_option("--out-dir", synth_args.out_dir)->required();
    synth_cmd->add_option("--scenario", synth_args.scenario);
    synth_cmd->add_option("--seed", synth_args.seed);
    synth_cmd->add_option("--pairs", synth_args.pairs);
    synth_cmd->add_option("--singles", synth_args.singles);
    synth_cmd->add_option("--offset-mm", synth_args.offset_mm);
    synth_cmd->add_option("--noise-mm", synth_args.noise_mm);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "execute the full pipeline");
    run_cmd->add_option("--config", run_args.config_file, "JSON config; flags override it");
    auto* opt_tracking = run_cmd->add_option("--tracking", run_args.config.tracking_path);
    auto* opt_groups = run_cmd->add_option("--groups", run_args.config.groups_path);
    auto* opt_env = run_cmd->add_option("--env", run_args.config.geometry_path);
    auto* opt_out = run_cmd->add_option("--out-dir", run_args.config.out_dir);
    auto* opt_model = run_cmd->add_option("--model", run_args.config.model_path);
    auto* opt_ext = run_cmd->add_option("--external-scores", run_args.config.external_scores_path);
    auto* opt_interval = run_cmd->add_option("--interval-s", run_args.config.interval_ms);
    auto* opt_seq = run_cmd->add_option("--seq-len", run_args.config.seq_len);
    auto* opt_rate = run_cmd->add_option("--rate-hz", run_args.config.rate_hz);
    auto* opt_tau = run_cmd->add_option("--threshold", run_args.config.threshold);
    auto* opt_seed = run_cmd->add_option("--seed", run_args.config.seed);
    auto* opt_mode = run_cmd->add_option("--mode", run_args.mode)
                         ->check(CLI::IsMember({"train", "load-model", "external-scores"}));
    auto* opt_lr = run_cmd->add_option("--lr", run_args.config.learning_rate);
    auto* opt_epochs = run_cmd->add_option("--max-epochs", run_args.config.max_epochs);
    auto* opt_denc = run_cmd->add_option("--d-enc", run_args.config.d_enc_mm);
    auto* opt_hyst = run_cmd->add_option("--hysteresis", run_args.config.hysteresis_mm);
    auto* opt_window = run_cmd->add_option("--window", run_args.config.delta_window);
    auto* opt_cell = run_cmd->add_option("--cell-mm", run_args.config.cell_mm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (ingest_cmd->parsed()) run_ingest(ingest_args);
        if (bin_cmd->parsed()) run_bin(bin_args);
        if (features_cmd->parsed()) run_features(features_args);
        if (train_cmd->parsed()) run_train(train_args);
        if (score_cmd->parsed()) run_score(score_args);
        if (detect_cmd->parsed()) run_detect(detect_args);
        if (analyze_cmd->parsed()) run_analyze(analyze_args);
        if (synth_cmd->parsed()) run_synth(synth_args);
        if (run_cmd->parsed()) {
            PipelineConfig cfg;
            double interval_s = 60.0;
            if (!run_args.config_file.empty()) cfg = load_config_file(run_args.config_file);
            interval_s = static_cast<double>(cfg.interval_ms) / 1000.0;
            if (*opt_tracking) cfg.tracking_path = run_args.config.tracking_path;
            if (*opt_groups) cfg.groups_path = run_args.config.groups_path;
            if (*opt_env) cfg.geometry_path = run_args.config.geometry_path;
            if (*opt_out) cfg.out_dir = run_args.config.out_dir;
            if (*opt_model) cfg.model_path = run_args.config.model_path;
            if (*opt_ext) cfg.external_scores_path = run_args.config.external_scores_path;
            if (*opt_interval)
                cfg.interval_ms = run_args.config.interval_ms * 1000;  // flag takes seconds
            else
                cfg.interval_ms = static_cast<std::int64_t>(interval_s * 1000.0);
            if (*opt_seq) cfg.seq_len = run_args.config.seq_len;
            if (*opt_rate) cfg.rate_hz = run_args.config.rate_hz;
            if (*opt_tau) cfg.threshold = run_args.config.threshold;
            if (*opt_seed) cfg.seed = run_args.config.seed;
            if (*opt_mode) {
                if (run_args.mode == "train") cfg.mode = ScorerMode::Train;
                if (run_args.mode == "load-model") cfg.mode = ScorerMode::LoadModel;
                if (run_args.mode == "external-scores") cfg.mode = ScorerMode::ExternalScores;
            }
            if (*opt_lr) cfg.learning_rate = run_args.config.learning_rate;
            if (*opt_epochs) cfg.max_epochs = run_args.config.max_epochs;
            if (*opt_denc) cfg.d_enc_mm = run_args.config.d_enc_mm;
            if (*opt_hyst) cfg.hysteresis_mm = run_args.config.hysteresis_mm;
            if (*opt_window) cfg.delta_window = run_args.config.delta_window;
            if (*opt_cell) cfg.cell_mm = run_args.config.cell_mm;

            if (cfg.tracking_path.empty() || cfg.geometry_path.empty() || cfg.out_dir.empty())
                throw InputError("run requires --tracking, --env and --out-dir (or a config)");
            RunManifest manifest = run_pipeline(cfg);
            std::cout << "run: complete, " << manifest.stages.size() << " stages, "
                      << manifest.total_duration_ms / 1000.0 << " s\n";
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const StageError& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitOk;
}
