#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pedflock/trajectory.hpp"

namespace pedflock {

/// Counters accumulated while parsing one input stream.
struct ParseStats {
    std::size_t rows_total = 0;      // data rows seen, header excluded
    std::size_t rows_malformed = 0;  // skipped: bad field count, non-numeric, bad values
    std::size_t duplicate_points = 0;
    bool header_skipped = false;
    std::vector<std::string> warnings;
};

struct TrackingData {
    TrajectoryMap trajectories;
    ParseStats stats;
};

/// Parse the 7-column tracking CSV (t_ms, pid, x, y, speed, motion angle,
/// facing angle). Rows are grouped by pid and sorted by time; angles are
/// wrapped into (-pi, pi]; malformed rows are counted and skipped. An
/// unreadable stream throws.
TrackingData parse_tracking_csv(std::istream& in);

struct AnnotationData {
    std::vector<GroupAnnotation> annotations;
    ParseStats stats;
};

/// Parse space-separated group rows: pid, group_size, group_size-1 partners.
AnnotationData parse_group_annotations(std::istream& in);

/// Unordered pair {a,b} present iff either member's row lists the other.
std::set<PidPair> annotation_pair_set(std::span<const GroupAnnotation> annotations);

/// Report pairs listed by only one member (reciprocity is not assumed).
std::vector<std::string> validate_annotation_reciprocity(
    std::span<const GroupAnnotation> annotations);

/// Parse the JSON geometry file (boundary polygon, pillars, spots).
/// Throws on a self-intersecting boundary, < 3 vertices, or pillar radius <= 0.
EnvironmentGeometry parse_environment(std::istream& in);

struct BoundaryFilterResult {
    TrajectoryMap trajectories;
    std::size_t points_removed = 0;
    std::size_t trajectories_dropped = 0;
};

/// Drop points outside the boundary polygon (on-edge counts inside);
/// trajectories left empty are removed entirely.
BoundaryFilterResult filter_to_boundary(const TrajectoryMap& trajectories,
                                        const EnvironmentGeometry& geometry);

struct DatasetSummary {
    std::size_t agents = 0;
    std::size_t total_records = 0;
    std::size_t min_records_per_agent = 0;
    std::size_t max_records_per_agent = 0;
    double mean_records_per_agent = 0.0;
    std::optional<double> mean_interval_s;  // absent when no agent has 2+ points
    double duration_h = 0.0;
};

DatasetSummary summarize_dataset(const TrajectoryMap& trajectories);

}  // namespace pedflock
