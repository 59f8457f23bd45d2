#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pedflock/io.hpp"
#include "pedflock/pipeline.hpp"
#include "pedflock/synth.hpp"

using namespace pedflock;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pedflock_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PipelineConfig fixture_config(const TempDir& dir, std::uint64_t seed) {
    auto spec = synth::make_default_scenario();
    auto gen = synth::generate_synthetic_scenario(spec, seed);
    write_file(dir.path / "tracking.csv", gen.tracking_csv);
    write_file(dir.path / "groups.txt", gen.annotations_txt);
    write_file(dir.path / "env.json", gen.geometry_json);

    PipelineConfig cfg;
    cfg.tracking_path = dir.path / "tracking.csv";
    cfg.groups_path = dir.path / "groups.txt";
    cfg.geometry_path = dir.path / "env.json";
    cfg.out_dir = dir.path / "out";
    cfg.seed = seed;
    return cfg;
}

std::int64_t stage_count(const RunManifest& m, const std::string& stage,
                         const std::string& key) {
    for (const auto& s : m.stages) {
        if (s.name == stage) return s.counts.at(key);
    }
    FAIL("stage not found: ", stage);
    return -1;
}

}  // namespace

TEST_CASE("run_pipeline: synthetic fixture end to end with conserved stage counts") {
    TempDir dir("e2e");
    PipelineConfig cfg = fixture_config(dir, 7);
    RunManifest manifest = run_pipeline(cfg);

    CHECK(manifest.complete);
    REQUIRE(manifest.stages.size() == 7);
    for (const auto& s : manifest.stages) CHECK(s.status == "OK");

    CHECK(stage_count(manifest, "ingest", "agents") == 40);
    CHECK(stage_count(manifest, "ingest", "annotation_pairs") == 8);

    // Conservation: eligible agents flow into detection unchanged.
    auto eligible = stage_count(manifest, "bin", "eligible_agents");
    CHECK(eligible == stage_count(manifest, "detect", "assignment_universe"));

    // Every enumerated pair is scored.
    CHECK(stage_count(manifest, "features", "pairs") ==
          stage_count(manifest, "score", "scores"));

    for (const char* name :
         {"summary.json", "bins.csv", "bin_stats.json", "features.csv", "model.json",
          "training_report.json", "scores.csv", "assignments.csv", "flock_summary.json",
          "validation.json", "footprints.csv", "heatmap.csv", "encounters.csv",
          "timeline.csv", "ecdf_S-S.csv", "ecdf_S-G.csv", "ecdf_G-G.csv", "regression.json",
          "run_manifest.json"}) {
        CHECK_MESSAGE(fs::exists(cfg.out_dir / name), name);
    }

    // Stage durations must account for (nearly) the whole run.
    double sum = 0.0;
    for (const auto& s : manifest.stages) sum += s.duration_ms;
    CHECK(sum <= manifest.total_duration_ms);
    CHECK(sum >= 0.95 * manifest.total_duration_ms);
}

TEST_CASE("run_pipeline: rerun with identical config reproduces identical data bytes") {
    TempDir dir("determinism");
    PipelineConfig cfg = fixture_config(dir, 21);
    run_pipeline(cfg);

    std::map<std::string, std::string> first;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir))
        first[entry.path().filename().string()] = slurp(entry.path());

    fs::remove_all(cfg.out_dir);
    run_pipeline(cfg);

    for (const auto& [name, content] : first) {
        // Timing-bearing reports are exempt; everything else is byte-identical.
        if (name == "run_manifest.json" || name == "flock_summary.json") continue;
        CHECK_MESSAGE(slurp(cfg.out_dir / name) == content, name);
    }
}

TEST_CASE("run_pipeline: missing tracking file fails at ingest, manifest records it") {
    TempDir dir("failure");
    PipelineConfig cfg = fixture_config(dir, 3);
    cfg.tracking_path = dir.path / "missing.csv";

    CHECK_THROWS_AS(run_pipeline(cfg), InputError);

    std::string manifest = slurp(cfg.out_dir / "run_manifest.json");
    CHECK(manifest.find("\"complete\": false") != std::string::npos);
    CHECK(manifest.find("\"failed_stage\": \"ingest\"") != std::string::npos);
}

TEST_CASE("run_pipeline: external-scores mode resumes from imported scores") {
    TempDir dir("external");
    PipelineConfig cfg = fixture_config(dir, 9);
    RunManifest trained = run_pipeline(cfg);
    CHECK(trained.complete);

    // Feed the produced scores back through the external-scores path.
    PipelineConfig ext = cfg;
    ext.mode = ScorerMode::ExternalScores;
    ext.external_scores_path = cfg.out_dir / "scores.csv";
    ext.out_dir = dir.path / "out_ext";
    RunManifest manifest = run_pipeline(ext);
    CHECK(manifest.complete);

    CHECK(slurp(ext.out_dir / "assignments.csv") == slurp(cfg.out_dir / "assignments.csv"));
}

TEST_CASE("run_pipeline: load-model mode reuses a trained model") {
    TempDir dir("loadmodel");
    PipelineConfig cfg = fixture_config(dir, 13);
    run_pipeline(cfg);

    PipelineConfig loaded = cfg;
    loaded.mode = ScorerMode::LoadModel;
    loaded.model_path = cfg.out_dir / "model.json";
    loaded.out_dir = dir.path / "out_loaded";
    RunManifest manifest = run_pipeline(loaded);
    CHECK(manifest.complete);
    CHECK(slurp(loaded.out_dir / "scores.csv") == slurp(cfg.out_dir / "scores.csv"));
}
