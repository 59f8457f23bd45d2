#include "pedflock/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pedflock/binning.hpp"
#include "pedflock/classifier.hpp"
#include "pedflock/flock.hpp"
#include "pedflock/ingest.hpp"
#include "pedflock/io.hpp"
#include "pedflock/metrics.hpp"
#include "pedflock/pairfeat.hpp"
#include "pedflock/rng.hpp"
#include "pedflock/version.hpp"

namespace pedflock {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Enumerate all unordered window pairs of each bin and compute features.
/// Windows inside a bin are visited in ascending pid order.
std::vector<PairRecord> enumerate_pair_features(const std::vector<TimeBin>& bins,
                                                std::size_t* pairs_skipped) {
    std::vector<PairRecord> records;
    for (const auto& bin : bins) {
        std::vector<const TrajectoryWindow*> windows;
        windows.reserve(bin.windows.size());
        for (const auto& w : bin.windows) windows.push_back(&w);
        std::sort(windows.begin(), windows.end(),
                  [](const auto* a, const auto* b) { return a->pid < b->pid; });

        for (std::size_t i = 0; i < windows.size(); ++i) {
            for (std::size_t j = i + 1; j < windows.size(); ++j) {
                auto features = extract_pair_features(*windows[i], *windows[j]);
                if (!features) {
                    if (pairs_skipped) ++(*pairs_skipped);
                    continue;
                }
                PairRecord rec;
                rec.key.bin_index = bin.bin_index;
                rec.key.pid_a = std::min(windows[i]->pid, windows[j]->pid);
                rec.key.pid_b = std::max(windows[i]->pid, windows[j]->pid);
                rec.features = *features;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

}  // namespace

std::string to_string(ScorerMode mode) {
    switch (mode) {
        case ScorerMode::Train: return "train";
        case ScorerMode::LoadModel: return "load-model";
        case ScorerMode::ExternalScores: return "external-scores";
    }
    return "?";
}

void write_manifest(std::ostream& out, const RunManifest& manifest,
                    const PipelineConfig& config) {
    nlohmann::json doc;
    doc["artifact"] = "pedflock run-manifest v1";
    doc["version"] = manifest.version;
    doc["complete"] = manifest.complete;
    doc["failed_stage"] = manifest.failed_stage.empty() ? nlohmann::json(nullptr)
                                                        : nlohmann::json(manifest.failed_stage);
    doc["total_duration_ms"] = manifest.total_duration_ms;
    doc["config"] = {{"tracking", config.tracking_path.string()},
                     {"groups", config.groups_path.string()},
                     {"geometry", config.geometry_path.string()},
                     {"out_dir", config.out_dir.string()},
                     {"model", config.model_path.string()},
                     {"external_scores", config.external_scores_path.string()},
                     {"interval_ms", config.interval_ms},
                     {"seq_len", config.seq_len},
                     {"rate_hz", config.rate_hz},
                     {"threshold", config.threshold},
                     {"seed", config.seed},
                     {"mode", to_string(config.mode)},
                     {"learning_rate", config.learning_rate},
                     {"max_epochs", config.max_epochs},
                     {"patience", config.patience},
                     {"split_ratio", config.split_ratio},
                     {"d_enc_mm", config.d_enc_mm},
                     {"hysteresis_mm", config.hysteresis_mm},
                     {"delta_window", config.delta_window},
                     {"cell_mm", config.cell_mm}};
    doc["stages"] = nlohmann::json::array();
    for (const auto& s : manifest.stages) {
        nlohmann::json stage = {{"name", s.name},
                                {"status", s.status},
                                {"duration_ms", s.duration_ms},
                                {"counts", nlohmann::json::object()}};
        for (const auto& [k, v] : s.counts) stage["counts"][k] = v;
        doc["stages"].push_back(stage);
    }
    doc["warnings"] = manifest.warnings;
    out << doc.dump(2) << "\n";
}

namespace {

void validate_config(const PipelineConfig& config) {
    auto reject = [](const std::string& what) {
        throw InputError("invalid configuration: " + what);
    };
    if (config.interval_ms <= 0) reject("interval must be positive");
    if (config.seq_len < 2) reject("seq-len must be at least 2");
    if (config.rate_hz <= 0.0) reject("rate-hz must be positive");
    if (config.threshold < 0.0 || config.threshold > 1.0) reject("threshold must be in [0,1]");
    if (config.learning_rate <= 0.0) reject("learning rate must be positive");
    if (config.max_epochs < 1) reject("max-epochs must be at least 1");
    if (config.split_ratio <= 0.0 || config.split_ratio >= 1.0)
        reject("split ratio must be in (0,1)");
    if (config.d_enc_mm <= 0.0) reject("d-enc must be positive");
    if (config.hysteresis_mm < 0.0) reject("hysteresis must be non-negative");
    if (config.delta_window < 1) reject("delta window must be at least 1");
    if (config.cell_mm <= 0.0) reject("cell size must be positive");
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
    validate_config(config);
    RunManifest manifest;
    manifest.version = std::string(kVersion);
    fs::create_directories(config.out_dir);

    const auto t_run = Clock::now();
    auto persist_manifest = [&]() {
        manifest.total_duration_ms = ms_since(t_run);
        auto out = io::open_output(config.out_dir / "run_manifest.json");
        write_manifest(out, manifest, config);
    };

    StageRecord* stage = nullptr;
    Clock::time_point t_stage;
    auto begin_stage = [&](const std::string& name) {
        StageRecord record;
        record.name = name;
        manifest.stages.push_back(std::move(record));
        stage = &manifest.stages.back();
        t_stage = Clock::now();
    };
    auto end_stage = [&]() { stage->duration_ms = ms_since(t_stage); };

    try {
        // --- ingest ---------------------------------------------------------
        begin_stage("ingest");
        auto tracking_in = io::open_input(config.tracking_path);
        TrackingData tracking = parse_tracking_csv(tracking_in);

        auto geometry_in = io::open_input(config.geometry_path);
        EnvironmentGeometry geometry = parse_environment(geometry_in);

        std::vector<GroupAnnotation> annotations;
        std::set<PidPair> annotation_pairs;
        bool have_annotations = !config.groups_path.empty();
        io::IngestReport report;
        if (have_annotations) {
            auto groups_in = io::open_input(config.groups_path);
            AnnotationData ann = parse_group_annotations(groups_in);
            annotations = std::move(ann.annotations);
            annotation_pairs = annotation_pair_set(annotations);
            for (const auto& w : ann.stats.warnings) manifest.warnings.push_back(w);
            for (const auto& w : validate_annotation_reciprocity(annotations))
                manifest.warnings.push_back("annotation asymmetry: " + w);
        }

        BoundaryFilterResult filtered = filter_to_boundary(tracking.trajectories, geometry);
        report.summary = summarize_dataset(filtered.trajectories);
        report.rows_total = tracking.stats.rows_total;
        report.rows_malformed = tracking.stats.rows_malformed;
        report.duplicate_points = tracking.stats.duplicate_points;
        report.boundary_points_removed = filtered.points_removed;
        report.boundary_trajectories_dropped = filtered.trajectories_dropped;
        report.annotations = annotations.size();
        report.annotation_pairs = annotation_pairs.size();
        report.warnings = manifest.warnings;
        {
            auto out = io::open_output(config.out_dir / "summary.json");
            io::write_ingest_report(out, report);
        }
        stage->counts["rows_total"] = static_cast<std::int64_t>(tracking.stats.rows_total);
        stage->counts["rows_malformed"] =
            static_cast<std::int64_t>(tracking.stats.rows_malformed);
        stage->counts["agents"] = static_cast<std::int64_t>(report.summary.agents);
        stage->counts["boundary_points_removed"] =
            static_cast<std::int64_t>(filtered.points_removed);
        stage->counts["annotation_pairs"] =
            static_cast<std::int64_t>(annotation_pairs.size());
        end_stage();

        // --- bin -------------------------------------------------------------
        begin_stage("bin");
        TrajectoryMap resampled;
        for (const auto& [pid, traj] : filtered.trajectories) {
            Trajectory r = resample_uniform(traj, config.rate_hz);
            if (!r.points.empty()) resampled.emplace(pid, std::move(r));
        }
        BinningResult binning = assign_bins(resampled, config.interval_ms, config.rate_hz);
        filter_min_length(binning, config.seq_len);
        BinStats stats = bin_stats(binning.bins);
        {
            auto out = io::open_output(config.out_dir / "bins.csv");
            io::write_bins(out, binning, config.rate_hz, config.seq_len);
        }
        {
            auto out = io::open_output(config.out_dir / "bin_stats.json");
            io::write_bin_stats(out, stats, config.seq_len, config.rate_hz, config.interval_ms);
        }
        stage->counts["resampled_agents"] = static_cast<std::int64_t>(resampled.size());
        stage->counts["bins"] = static_cast<std::int64_t>(binning.bins.size());
        stage->counts["eligible_agents"] = static_cast<std::int64_t>(stats.total_agents);
        end_stage();

        // --- features ---------------------------------------------------------
        begin_stage("features");
        std::size_t pairs_skipped = 0;
        std::vector<PairRecord> records = enumerate_pair_features(binning.bins, &pairs_skipped);
        {
            auto out = io::open_output(config.out_dir / "features.csv");
            io::write_features(out, records);
        }
        if (pairs_skipped > 0)
            manifest.warnings.push_back(std::to_string(pairs_skipped) +
                                        " pair(s) skipped: no defined mean direction");
        stage->counts["pairs"] = static_cast<std::int64_t>(records.size());
        stage->counts["pairs_skipped"] = static_cast<std::int64_t>(pairs_skipped);
        end_stage();

        // --- model -------------------------------------------------------------
        begin_stage("model");
        PairScoreModel model;
        bool have_model = false;
        if (config.mode == ScorerMode::Train) {
            if (!have_annotations)
                throw InputError("train mode requires a group annotation file");
            std::vector<std::string> warnings;
            std::vector<LabeledPair> dataset =
                build_training_set(records, annotation_pairs, config.seed, &warnings);
            for (const auto& w : warnings) manifest.warnings.push_back(w);
            auto [train, test] = split_train_test(dataset, config.split_ratio, config.seed);

            TrainOptions options;
            options.learning_rate = config.learning_rate;
            options.max_epochs = config.max_epochs;
            options.patience = config.patience;
            options.seed = config.seed;
            ModelMetadata metadata{config.rate_hz, config.seq_len, "accumulated_euclidean",
                                   config.seed};
            TrainOutcome outcome = train_logistic(train, options, metadata);
            model = outcome.model;
            have_model = true;

            nlohmann::json tr;
            tr["artifact"] = "pedflock training-report v1";
            tr["total_samples"] = dataset.size();
            tr["train_samples"] = train.size();
            tr["test_samples"] = test.size();
            tr["epochs_run"] = outcome.report.epochs_run;
            tr["stopped_early"] = outcome.report.stopped_early;
            tr["initial_train_loss"] = outcome.report.initial_train_loss;
            tr["final_train_loss"] = outcome.report.final_train_loss;
            if (!test.empty()) {
                EvalMetrics eval = evaluate(model, test);
                tr["test_accuracy"] = eval.accuracy;
                tr["test_precision"] = eval.precision;
                tr["test_recall"] = eval.recall;
                tr["test_f1"] = eval.f1;
            }
            {
                auto out = io::open_output(config.out_dir / "training_report.json");
                out << tr.dump(2) << "\n";
            }
            {
                auto out = io::open_output(config.out_dir / "model.json");
                io::write_model(out, model);
            }
            stage->counts["total_samples"] = static_cast<std::int64_t>(dataset.size());
            stage->counts["train_samples"] = static_cast<std::int64_t>(train.size());
            stage->counts["test_samples"] = static_cast<std::int64_t>(test.size());
            stage->counts["epochs_run"] = outcome.report.epochs_run;
        } else if (config.mode == ScorerMode::LoadModel) {
            auto in = io::open_input(config.model_path);
            model = io::read_model(in);
            have_model = true;
            if (model.metadata.seq_len != 0 && model.metadata.seq_len != config.seq_len)
                manifest.warnings.push_back("model seq_len " +
                                            std::to_string(model.metadata.seq_len) +
                                            " differs from configured " +
                                            std::to_string(config.seq_len));
            if (model.metadata.rate_hz != 0.0 && model.metadata.rate_hz != config.rate_hz)
                manifest.warnings.push_back("model rate_hz differs from configured rate");
        }
        end_stage();

        // --- score --------------------------------------------------------------
        begin_stage("score");
        std::vector<PairScore> scores;
        if (config.mode == ScorerMode::ExternalScores) {
            auto in = io::open_input(config.external_scores_path);
            std::vector<std::string> warnings;
            scores = import_external_scores(in, &warnings);
            for (const auto& w : warnings) manifest.warnings.push_back(w);
        } else {
            if (!have_model) throw StageError("score", "no model available");
            scores = score_pairs(model, records);
        }
        {
            auto out = io::open_output(config.out_dir / "scores.csv");
            io::write_scores(out, scores);
        }
        stage->counts["scores"] = static_cast<std::int64_t>(scores.size());
        end_stage();

        // --- detect ---------------------------------------------------------------
        begin_stage("detect");
        std::vector<PairScore> confident = threshold_pairs(scores, config.threshold);
        std::map<int, std::vector<PidPair>> edges_by_bin;
        for (const auto& s : confident)
            edges_by_bin[s.bin_index].push_back({s.pid_a, s.pid_b});

        std::vector<FlockAssignment> assignments;
        for (const auto& bin : binning.bins) {
            std::vector<Pid> members;
            members.reserve(bin.windows.size());
            for (const auto& w : bin.windows) members.push_back(w.pid);
            std::sort(members.begin(), members.end());
            auto it = edges_by_bin.find(bin.bin_index);
            static const std::vector<PidPair> kNoEdges;
            const auto& edges = it == edges_by_bin.end() ? kNoEdges : it->second;
            assignments.push_back(cluster_edges(members, edges, bin.bin_index));
        }
        {
            auto out = io::open_output(config.out_dir / "assignments.csv");
            io::write_assignments(out, assignments);
        }
        FlockSummary summary = flock_summary(assignments, ms_since(t_stage) / 1000.0);
        {
            auto out = io::open_output(config.out_dir / "flock_summary.json");
            io::write_flock_summary(out, summary);
        }
        if (have_annotations) {
            ValidationMetrics validation = validate_assignment(assignments, annotation_pairs);
            auto out = io::open_output(config.out_dir / "validation.json");
            io::write_validation(out, validation);
        }
        stage->counts["confident_edges"] = static_cast<std::int64_t>(confident.size());
        stage->counts["assignment_universe"] = static_cast<std::int64_t>(summary.total_agents);
        stage->counts["flocks"] = static_cast<std::int64_t>(summary.n_flocks);
        stage->counts["flock_agents"] = static_cast<std::int64_t>(summary.flock_agents);
        end_stage();

        // --- analyze -----------------------------------------------------------------
        begin_stage("analyze");
        const std::uint64_t sec_seed = derive_seed(config.seed, "welzl");
        std::vector<SpatialFootprint> footprints;
        std::vector<EncounterEvent> events;
        std::vector<Vec2> all_points;
        std::int64_t t_max = binning.origin_ms;
        for (std::size_t i = 0; i < binning.bins.size(); ++i) {
            const TimeBin& bin = binning.bins[i];
            for (const auto& w : bin.windows) {
                for (const auto& s : w.samples) all_points.push_back(s.pos());
                if (!w.samples.empty()) t_max = std::max(t_max, w.end_ms());
            }
            auto fp = bin_footprints(bin, assignments[i], sec_seed);
            footprints.insert(footprints.end(), fp.begin(), fp.end());
            auto ev = detect_encounters(bin, assignments[i], config.d_enc_mm,
                                        config.hysteresis_mm);
            annotate_encounter_kinematics(ev, bin, config.delta_window);
            events.insert(events.end(), ev.begin(), ev.end());
        }

        HeatmapGrid heatmap = accumulate_heatmap(all_points, geometry, config.cell_mm);

        const auto minutes = static_cast<std::size_t>(
            std::max<std::int64_t>(0, (t_max - binning.origin_ms + 59'999) / 60'000));
        std::vector<TimelineRow> timeline =
            interaction_timeline(events, binning.origin_ms, minutes);

        const std::map<std::string, std::string> params = {
            {"d_enc_mm", io::format_double(config.d_enc_mm)},
            {"hysteresis_mm", io::format_double(config.hysteresis_mm)},
            {"delta_window", std::to_string(config.delta_window)}};

        {
            auto out = io::open_output(config.out_dir / "footprints.csv");
            io::write_footprints(out, footprints);
        }
        {
            auto out = io::open_output(config.out_dir / "heatmap.csv");
            io::write_heatmap(out, heatmap);
        }
        {
            auto out = io::open_output(config.out_dir / "encounters.csv");
            io::write_encounters(out, events, params);
        }
        {
            auto out = io::open_output(config.out_dir / "timeline.csv");
            io::write_timeline(out, timeline);
        }
        for (EncounterType type : {EncounterType::SS, EncounterType::SG, EncounterType::GG}) {
            std::vector<double> distances;
            for (const auto& ev : events)
                if (ev.type == type) distances.push_back(ev.min_distance_mm);
            auto out = io::open_output(config.out_dir /
                                       ("ecdf_" + to_string(type) + ".csv"));
            if (distances.empty()) {
                out << io::meta_line("ecdf") << "\n";
                out << "min_distance_mm,cumulative_fraction\n";
            } else {
                io::write_ecdf(out, ecdf(distances));
            }
        }
        {
            auto out = io::open_output(config.out_dir / "regression.json");
            io::write_regression(out, groupsize_distance_regression(events), params);
        }
        stage->counts["footprints"] = static_cast<std::int64_t>(footprints.size());
        stage->counts["encounters"] = static_cast<std::int64_t>(events.size());
        stage->counts["heatmap_points"] = heatmap.total;
        end_stage();

        manifest.complete = true;
        persist_manifest();
    } catch (const std::exception& e) {
        if (stage != nullptr) {
            stage->status = "FAILED";
            stage->duration_ms = ms_since(t_stage);
            manifest.failed_stage = stage->name;
        }
        manifest.complete = false;
        persist_manifest();
        if (dynamic_cast<const InputError*>(&e) != nullptr) throw;
        throw StageError(manifest.failed_stage.empty() ? "pipeline" : manifest.failed_stage,
                         e.what());
    }
    return manifest;
}

}  // namespace pedflock
