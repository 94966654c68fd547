#pragma once

#include "netobs/common.hpp"
#include "netobs/graph.hpp"

#include <vector>

namespace netobs::placement {

// Per-candidate coverage: table.sets[k] lists the targets with an influence
// path to candidate table.candidates[k].
struct CoverageTable {
    NodeSet candidates;
    std::vector<NodeSet> sets;
};

/// One forward BFS per target; R_i = { t in T : t ~> x_i }.
CoverageTable coverage_sets(const graph::InferenceGraph& g, const NodeSet& candidates);

/// Greedy set cover over the coverage table. Ties break toward the lowest
/// node index. Throws InfeasibleError naming the targets no candidate can
/// cover.
NodeSet greedy_sensor_placement(const graph::InferenceGraph& g, const NodeSet& candidates);

/// True minimum cover by exhaustive enumeration in increasing subset size.
/// Candidates capped at 20.
NodeSet min_sensors_exact(const graph::InferenceGraph& g, const NodeSet& candidates);

/// Grow `base_sensors` to q_total sensors, each step adding the candidate
/// that minimizes the resulting minimum functional-observer order (ties to
/// the lowest index). Requires the base placement to be structurally
/// functionally observable.
NodeSet order_minimizing_placement(const graph::InferenceGraph& g, const NodeSet& base_sensors,
                                   const NodeSet& candidates, int q_total);

}  // namespace netobs::placement
