#include "pedflock/flock.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace pedflock {

FlockAssignment cluster_edges(std::span<const Pid> bin_members,
                              std::span<const PidPair> edges, int bin_index) {
    std::map<Pid, std::size_t> index_of;
    for (Pid pid : bin_members) index_of.emplace(pid, index_of.size());

    UnionFind uf(index_of.size());
    for (const auto& [a, b] : edges) {
        auto ia = index_of.find(a);
        auto ib = index_of.find(b);
        if (ia == index_of.end() || ib == index_of.end())
            throw std::invalid_argument("cluster_edges: edge references pid outside the bin");
        uf.unite(ia->second, ib->second);
    }

    std::map<std::size_t, std::vector<Pid>> components;
    for (const auto& [pid, idx] : index_of) components[uf.find(idx)].push_back(pid);

    FlockAssignment out;
    out.bin_index = bin_index;
    for (auto& [root, members] : components) {
        std::sort(members.begin(), members.end());
        if (members.size() >= 2) {
            out.groups.push_back(std::move(members));
        } else {
            out.singles.push_back(members.front());
        }
    }
    std::sort(out.groups.begin(), out.groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::sort(out.singles.begin(), out.singles.end());
    return out;
}

ValidationMetrics validate_assignment(std::span<const FlockAssignment> assignments,
                                      const std::set<PidPair>& annotation_pairs) {
    ValidationMetrics m;
    std::set<Pid> annotated_agents;
    for (const auto& [a, b] : annotation_pairs) {
        annotated_agents.insert(a);
        annotated_agents.insert(b);
    }
    for (const auto& assignment : assignments) {
        std::set<PidPair> predicted;
        for (const auto& group : assignment.groups) {
            for (std::size_t i = 0; i < group.size(); ++i)
                for (std::size_t j = i + 1; j < group.size(); ++j)
                    predicted.insert(make_pair_key(group[i], group[j]));
        }

        std::vector<Pid> universe = assignment.singles;
        for (const auto& group : assignment.groups)
            universe.insert(universe.end(), group.begin(), group.end());
        std::sort(universe.begin(), universe.end());

        std::set<PidPair> actual;
        for (std::size_t i = 0; i < universe.size(); ++i) {
            for (std::size_t j = i + 1; j < universe.size(); ++j) {
                PidPair key = make_pair_key(universe[i], universe[j]);
                if (annotation_pairs.contains(key)) actual.insert(key);
            }
        }

        for (const auto& p : predicted) {
            if (actual.contains(p)) ++m.pair_tp;
            else ++m.pair_fp;
        }
        for (const auto& p : actual) {
            if (!predicted.contains(p)) ++m.pair_fn;
        }

        for (const auto& group : assignment.groups) {
            for (Pid pid : group) {
                if (annotated_agents.contains(pid)) ++m.agent_tp;
                else ++m.agent_fp;
            }
        }
        for (Pid pid : assignment.singles) {
            if (annotated_agents.contains(pid)) ++m.agent_fn;
        }
    }

    m.pair_precision_defined = m.pair_tp + m.pair_fp > 0;
    m.pair_recall_defined = m.pair_tp + m.pair_fn > 0;
    m.agent_precision_defined = m.agent_tp + m.agent_fp > 0;
    m.agent_recall_defined = m.agent_tp + m.agent_fn > 0;
    m.pair_precision =
        m.pair_precision_defined ? static_cast<double>(m.pair_tp) / (m.pair_tp + m.pair_fp) : 0.0;
    m.pair_recall =
        m.pair_recall_defined ? static_cast<double>(m.pair_tp) / (m.pair_tp + m.pair_fn) : 0.0;
    m.pair_f1 = (m.pair_precision + m.pair_recall) > 0.0
                    ? 2.0 * m.pair_precision * m.pair_recall / (m.pair_precision + m.pair_recall)
                    : 0.0;
    m.agent_precision = m.agent_precision_defined
                            ? static_cast<double>(m.agent_tp) / (m.agent_tp + m.agent_fp)
                            : 0.0;
    m.agent_recall = m.agent_recall_defined
                         ? static_cast<double>(m.agent_tp) / (m.agent_tp + m.agent_fn)
                         : 0.0;
    return m;
}

FlockSummary flock_summary(std::span<const FlockAssignment> assignments,
                           double detection_runtime_s) {
    FlockSummary s;
    s.detection_runtime_s = detection_runtime_s;
    for (const auto& assignment : assignments) {
        s.n_flocks += assignment.groups.size();
        s.total_agents += assignment.singles.size();
        for (const auto& group : assignment.groups) {
            s.total_agents += group.size();
            s.flock_agents += group.size();
        }
    }
    if (s.total_agents > 0)
        s.flock_pct = 100.0 * static_cast<double>(s.flock_agents) / s.total_agents;
    return s;
}

}  // namespace pedflock
