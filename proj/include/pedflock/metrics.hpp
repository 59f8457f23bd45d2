#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedflock/binning.hpp"
#include "pedflock/flock.hpp"
#include "pedflock/geometry.hpp"

namespace pedflock {

enum class SubjectKind { Single, Group };

std::string to_string(SubjectKind kind);

/// Hull + smallest enclosing circle of one subject's samples in one bin.
struct SpatialFootprint {
    int bin_index = 0;
    SubjectKind kind = SubjectKind::Single;
    std::int64_t subject_id = 0;  // pid for singles, flock ordinal for groups
    std::vector<Pid> member_pids;
    double hull_area_m2 = 0.0;
    Vec2 sec_center_mm;
    double sec_radius_mm = 0.0;
    double straightness = 0.0;  // member mean for groups
    bool stationary = false;
    std::optional<double> min_clearance_mm;
    std::optional<double> mean_clearance_mm;
};

/// Occupancy counts over a uniform grid anchored at the boundary bbox min.
struct HeatmapGrid {
    double cell_mm = 0.0;
    Vec2 origin_mm;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::int64_t> counts;  // row-major, y * nx + x
    std::int64_t total = 0;

    std::int64_t at(std::size_t ix, std::size_t iy) const { return counts[iy * nx + ix]; }
};

HeatmapGrid accumulate_heatmap(std::span<const Vec2> points_mm,
                               const EnvironmentGeometry& geometry, double cell_mm);

/// Chord length over path length, in [0, 1]. A zero-length path counts as
/// straight (flagged stationary by callers).
double trajectory_straightness(const TrajectoryWindow& window);

/// Distance to the nearest other agent present at time t_ms, interpolating
/// the other agents' positions. Empty when nobody else is present.
std::optional<double> clearance_radius(const TimeBin& bin, Pid pid, std::int64_t t_ms);

enum class EncounterType { SS, SG, GG };

std::string to_string(EncounterType type);

struct EncounterParticipant {
    SubjectKind kind = SubjectKind::Single;
    std::int64_t subject_id = 0;
    std::vector<Pid> member_pids;
    std::optional<double> delta_v_mm_s;     // post minus pre mean speed
    std::optional<double> delta_theta_rad;  // |wrapped heading change|, [0, pi]
};

/// One proximity episode between two subjects.
struct EncounterEvent {
    int bin_index = 0;
    EncounterType type = EncounterType::SS;
    EncounterParticipant a;  // canonical: singles before groups, then by id
    EncounterParticipant b;
    std::int64_t t_min_ms = 0;
    double min_distance_mm = 0.0;
    Vec2 location_mm;                // midpoint of the closest member pair
    std::optional<int> group_size;   // S-G only: the group's size
};

/// Episodes open when inter-subject distance drops below d_enc_mm and close
/// above d_enc_mm + hysteresis_mm or when the overlap window ends. Subject
/// distance is the minimum over member pairs.
std::vector<EncounterEvent> detect_encounters(const TimeBin& bin,
                                              const FlockAssignment& assignment,
                                              double d_enc_mm, double hysteresis_mm);

/// Mean speed over up to w samples from t_min onward, minus the mean over up
/// to w samples strictly before t_min; member-averaged for groups. Empty when
/// either side has no samples.
std::optional<double> speed_change(const EncounterEvent& event,
                                   const EncounterParticipant& participant, const TimeBin& bin,
                                   int w);

/// |wrapped difference| of pre/post circular-mean headings; group members are
/// combined by circular mean before wrapping.
std::optional<double> heading_change(const EncounterEvent& event,
                                     const EncounterParticipant& participant,
                                     const TimeBin& bin, int w);

/// Fill both deltas for both participants of every event.
void annotate_encounter_kinematics(std::vector<EncounterEvent>& events, const TimeBin& bin,
                                   int w);

struct TimelineRow {
    std::size_t minute = 0;
    EncounterType type = EncounterType::SS;
    std::size_t count = 0;
};

/// Per-minute counts by type, zero-filled over at least minute_bins minutes.
std::vector<TimelineRow> interaction_timeline(std::span<const EncounterEvent> events,
                                              std::int64_t t_origin_ms,
                                              std::size_t minute_bins);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    std::size_t n_events = 0;
};

/// OLS of S-G minimum encounter distance on group size. Empty with fewer
/// than two events or a single distinct group size.
std::optional<RegressionResult> groupsize_distance_regression(
    std::span<const EncounterEvent> events);

/// Right-continuous ECDF; ties collapse onto the last rank.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

/// Footprints for every single and every flock of the bin.
std::vector<SpatialFootprint> bin_footprints(const TimeBin& bin,
                                             const FlockAssignment& assignment,
                                             std::uint64_t sec_seed);

}  // namespace pedflock
