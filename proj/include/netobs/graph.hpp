#pragma once

#include "netobs/common.hpp"

#include <vector>

namespace netobs::graph {

// Directed structural graph of state interactions. A stored edge (j -> i)
// means "x_j influences x_i", i.e. A_ij is a structural nonzero.
class InferenceGraph {
  public:
    InferenceGraph(int n, const std::vector<std::pair<int, int>>& influence_edges,
                   NodeSet sensors, NodeSet targets);

    int node_count() const { return n_; }
    const NodeSet& sensors() const { return sensors_; }
    const NodeSet& targets() const { return targets_; }

    /// Nodes influenced by `node` (successors), sorted.
    const std::vector<int>& out_neighbors(int node) const;
    /// Nodes influencing `node` (predecessors), sorted.
    const std::vector<int>& in_neighbors(int node) const;

    bool has_edge(int from, int to) const;
    bool has_self_link(int node) const { return has_edge(node, node); }
    std::size_t edge_count() const { return edge_count_; }

    InferenceGraph with_sensors(NodeSet sensors) const;

  private:
    int n_;
    std::size_t edge_count_ = 0;
    std::vector<std::vector<int>> out_, in_;
    NodeSet sensors_, targets_;
};

struct BipartiteGraph {
    int left = 0;   // rows
    int right = 0;  // columns
    std::vector<std::vector<int>> adj;  // adj[row] = sorted column list, no duplicates

    BipartiteGraph() = default;
    BipartiteGraph(int left_count, int right_count);
    void add_edge(int l, int r);
    void finalize();  // sort + dedupe adjacency
};

struct Matching {
    std::vector<int> left_to_right;   // -1 when unmatched
    std::vector<int> right_to_left;
    int size = 0;
};

/// All nodes w reachable from `start` along influence edges, start included.
std::vector<int> reachable_from(const InferenceGraph& g, int start);

/// Maximum-cardinality matching via Hopcroft-Karp. Deterministic: adjacency
/// is processed in sorted order.
Matching maximum_matching(const BipartiteGraph& b);

/// Generic (structural) rank of the pattern = maximum matching size.
int structural_rank(const BipartiteGraph& pattern);

/// Columns covered by every maximum matching. Computed from one maximum
/// matching by alternating-path reachability from exposed column nodes
/// (Dulmage-Mendelsohn); exact, O(V + E) after the matching.
std::vector<int> columns_covered_by_all_max_matchings(const BipartiteGraph& b);
std::vector<int> columns_covered_by_all_max_matchings(const BipartiteGraph& b,
                                                      const Matching& m);

/// Row pattern of [A; C] for the graph: n rows of A plus one row per sensor.
BipartiteGraph state_output_pattern(const InferenceGraph& g);

/// Nodes t that are not part of any minimal dilation set of G(A, C):
/// equivalently, columns of the [A; C] pattern covered by every maximum
/// matching.
std::vector<int> dilation_free_targets(const InferenceGraph& g);

}  // namespace netobs::graph
