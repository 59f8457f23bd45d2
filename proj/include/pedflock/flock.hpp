#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pedflock/trajectory.hpp"

namespace pedflock {

/// Disjoint-set forest with path compression and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Per-bin partition: flocks (>= 2 members each) plus singles, disjoint,
/// covering every eligible pid in the bin.
struct FlockAssignment {
    int bin_index = 0;
    std::vector<std::vector<Pid>> groups;  // members ascending; groups by smallest member
    std::vector<Pid> singles;              // ascending
};

/// Connected components of the confident-edge graph. Components of size >= 2
/// become flocks, isolated members become singles. Throws when an edge
/// references a pid outside bin_members.
FlockAssignment cluster_edges(std::span<const Pid> bin_members,
                              std::span<const PidPair> edges, int bin_index = 0);

struct ValidationMetrics {
    double pair_precision = 0.0;
    double pair_recall = 0.0;
    double pair_f1 = 0.0;
    double agent_precision = 0.0;
    double agent_recall = 0.0;
    bool pair_precision_defined = true;
    bool pair_recall_defined = true;
    bool agent_precision_defined = true;
    bool agent_recall_defined = true;
    std::size_t pair_tp = 0, pair_fp = 0, pair_fn = 0;
    std::size_t agent_tp = 0, agent_fp = 0, agent_fn = 0;
};

/// Pairwise metrics over within-bin pairs (same flock vs annotated same
/// group) and agent-level metrics over the "is in any group" label.
/// Undefined ratios come back as 0 with their flag cleared.
ValidationMetrics validate_assignment(std::span<const FlockAssignment> assignments,
                                      const std::set<PidPair>& annotation_pairs);

struct FlockSummary {
    std::size_t total_agents = 0;
    std::size_t flock_agents = 0;
    std::optional<double> flock_pct;  // absent when total_agents == 0
    std::size_t n_flocks = 0;
    double detection_runtime_s = 0.0;
};

FlockSummary flock_summary(std::span<const FlockAssignment> assignments,
                           double detection_runtime_s = 0.0);

}  // namespace pedflock
