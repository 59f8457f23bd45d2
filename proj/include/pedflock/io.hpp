#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedflock/binning.hpp"
#include "pedflock/classifier.hpp"
#include "pedflock/flock.hpp"
#include "pedflock/ingest.hpp"
#include "pedflock/metrics.hpp"

namespace pedflock::io {

/// Shortest round-trip-exact decimal representation.
std::string format_double(double v);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// Every artifact starts with "# pedflock <name> v1[; key=value]...".
std::string meta_line(const std::string& artifact,
                      const std::map<std::string, std::string>& params = {});

struct Meta {
    std::string artifact;
    std::map<std::string, std::string> params;
};

std::optional<Meta> parse_meta_line(const std::string& line);

// --- bins artifact -------------------------------------------------------

struct BinsArtifact {
    BinningResult binning;
    double rate_hz = 0.0;
    std::size_t seq_len = 0;  // 0 when the length filter has not run
};

void write_bins(std::ostream& out, const BinningResult& binning, double rate_hz,
                std::size_t seq_len);
BinsArtifact read_bins(std::istream& in);

// --- features / scores / assignments --------------------------------------

void write_features(std::ostream& out, std::span<const PairRecord> records);
std::vector<PairRecord> read_features(std::istream& in);

void write_scores(std::ostream& out, std::span<const PairScore> scores);
std::vector<PairScore> read_scores(std::istream& in);

void write_assignments(std::ostream& out, std::span<const FlockAssignment> assignments);
std::vector<FlockAssignment> read_assignments(std::istream& in);

// --- model ----------------------------------------------------------------

void write_model(std::ostream& out, const PairScoreModel& model);
PairScoreModel read_model(std::istream& in);

// --- analysis outputs ------------------------------------------------------

void write_footprints(std::ostream& out, std::span<const SpatialFootprint> footprints);
void write_heatmap(std::ostream& out, const HeatmapGrid& grid);
void write_encounters(std::ostream& out, std::span<const EncounterEvent> events,
                      const std::map<std::string, std::string>& params);
void write_timeline(std::ostream& out, std::span<const TimelineRow> rows);
void write_ecdf(std::ostream& out, std::span<const std::pair<double, double>> steps);
void write_regression(std::ostream& out, const std::optional<RegressionResult>& regression,
                      const std::map<std::string, std::string>& params);

// --- summaries --------------------------------------------------------------

struct IngestReport {
    DatasetSummary summary;
    std::size_t rows_total = 0;
    std::size_t rows_malformed = 0;
    std::size_t duplicate_points = 0;
    std::size_t boundary_points_removed = 0;
    std::size_t boundary_trajectories_dropped = 0;
    std::size_t annotations = 0;
    std::size_t annotation_pairs = 0;
    std::vector<std::string> warnings;
};

void write_ingest_report(std::ostream& out, const IngestReport& report);

void write_bin_stats(std::ostream& out, const BinStats& stats, std::size_t seq_len,
                     double rate_hz, std::int64_t interval_ms);

void write_flock_summary(std::ostream& out, const FlockSummary& summary);

void write_validation(std::ostream& out, const ValidationMetrics& metrics);

}  // namespace pedflock::io
