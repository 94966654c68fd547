#include "netobs/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

namespace netobs::graph {

namespace {
void check_nodes(const NodeSet& nodes, int n, const char* what) {
    std::set<int> seen;
    for (int v : nodes) {
        if (v < 0 || v >= n) throw InputError(std::string(what) + ": node index out of range");
        if (!seen.insert(v).second) throw InputError(std::string(what) + ": duplicate node");
    }
}
}  // namespace

InferenceGraph::InferenceGraph(int n, const std::vector<std::pair<int, int>>& influence_edges,
                               NodeSet sensors, NodeSet targets)
    : n_(n), out_(n), in_(n), sensors_(std::move(sensors)), targets_(std::move(targets)) {
    if (n < 0) throw InputError("InferenceGraph: negative node count");
    for (auto [j, i] : influence_edges) {
        if (j < 0 || j >= n || i < 0 || i >= n)
            throw InputError("InferenceGraph: edge index out of range");
        out_[j].push_back(i);
        in_[i].push_back(j);
    }
    for (auto& v : out_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& v : in_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (const auto& v : out_) edge_count_ += v.size();
    check_nodes(sensors_, n_, "sensors");
    check_nodes(targets_, n_, "targets");
}

const std::vector<int>& InferenceGraph::out_neighbors(int node) const {
    if (node < 0 || node >= n_) throw InputError("out_neighbors: index out of range");
    return out_[node];
}

const std::vector<int>& InferenceGraph::in_neighbors(int node) const {
    if (node < 0 || node >= n_) throw InputError("in_neighbors: index out of range");
    return in_[node];
}

bool InferenceGraph::has_edge(int from, int to) const {
    const auto& o = out_neighbors(from);
    return std::binary_search(o.begin(), o.end(), to);
}

InferenceGraph InferenceGraph::with_sensors(NodeSet sensors) const {
    InferenceGraph g = *this;
    check_nodes(sensors, n_, "sensors");
    g.sensors_ = std::move(sensors);
    return g;
}

BipartiteGraph::BipartiteGraph(int left_count, int right_count)
    : left(left_count), right(right_count), adj(left_count) {
    if (left_count < 0 || right_count < 0) throw InputError("BipartiteGraph: negative size");
}

void BipartiteGraph::add_edge(int l, int r) {
    if (l < 0 || l >= left || r < 0 || r >= right)
        throw InputError("BipartiteGraph: edge index out of range");
    adj[l].push_back(r);
}

void BipartiteGraph::finalize() {
    for (auto& v : adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

std::vector<int> reachable_from(const InferenceGraph& g, int start) {
    if (start < 0 || start >= g.node_count()) throw InputError("reachable_from: out of range");
    std::vector<char> seen(g.node_count(), 0);
    std::deque<int> queue{start};
    seen[start] = 1;
    std::vector<int> out;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        out.push_back(v);
        for (int w : g.out_neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {
constexpr int kInf = std::numeric_limits<int>::max();

// One BFS phase of Hopcroft-Karp: layers left vertices by alternating
// distance from the free ones.
bool hk_bfs(const BipartiteGraph& g, const std::vector<int>& match_l,
            const std::vector<int>& match_r, std::vector<int>& dist) {
    std::deque<int> queue;
    for (int l = 0; l < g.left; ++l) {
        if (match_l[l] < 0) {
            dist[l] = 0;
            queue.push_back(l);
        } else {
            dist[l] = kInf;
        }
    }
    bool found_free_column = false;
    while (!queue.empty()) {
        int l = queue.front();
        queue.pop_front();
        for (int r : g.adj[l]) {
            int l2 = match_r[r];
            if (l2 < 0) {
                found_free_column = true;
            } else if (dist[l2] == kInf) {
                dist[l2] = dist[l] + 1;
                queue.push_back(l2);
            }
        }
    }
    return found_free_column;
}

bool hk_dfs(const BipartiteGraph& g, int l, std::vector<int>& match_l, std::vector<int>& match_r,
            std::vector<int>& dist) {
    for (int r : g.adj[l]) {
        int l2 = match_r[r];
        if (l2 < 0 || (dist[l2] == dist[l] + 1 && hk_dfs(g, l2, match_l, match_r, dist))) {
            match_l[l] = r;
            match_r[r] = l;
            return true;
        }
    }
    dist[l] = kInf;
    return false;
}
}  // namespace

Matching maximum_matching(const BipartiteGraph& b) {
    Matching m;
    m.left_to_right.assign(b.left, -1);
    m.right_to_left.assign(b.right, -1);
    std::vector<int> dist(b.left);
    while (hk_bfs(b, m.left_to_right, m.right_to_left, dist)) {
        for (int l = 0; l < b.left; ++l)
            if (m.left_to_right[l] < 0 && hk_dfs(b, l, m.left_to_right, m.right_to_left, dist))
                ++m.size;
    }
    return m;
}

int structural_rank(const BipartiteGraph& pattern) { return maximum_matching(pattern).size; }

std::vector<int> columns_covered_by_all_max_matchings(const BipartiteGraph& b) {
    return columns_covered_by_all_max_matchings(b, maximum_matching(b));
}

std::vector<int> columns_covered_by_all_max_matchings(const BipartiteGraph& b,
                                                      const Matching& m) {
    // A matched column c can be exchanged out of the matching iff an
    // alternating path from some exposed column reaches it (col -> row via
    // a non-matching edge, row -> col via its matching edge).
    std::vector<std::vector<int>> col_rows(b.right);
    for (int l = 0; l < b.left; ++l)
        for (int r : b.adj[l]) col_rows[r].push_back(l);

    std::vector<char> col_seen(b.right, 0), row_seen(b.left, 0);
    std::deque<int> queue;
    for (int r = 0; r < b.right; ++r) {
        if (m.right_to_left[r] < 0) {
            col_seen[r] = 1;
            queue.push_back(r);
        }
    }
    while (!queue.empty()) {
        int r = queue.front();
        queue.pop_front();
        for (int l : col_rows[r]) {
            if (row_seen[l] || m.right_to_left[r] == l) continue;  // skip the matching edge
            row_seen[l] = 1;
            int r2 = m.left_to_right[l];
            if (r2 >= 0 && !col_seen[r2]) {
                col_seen[r2] = 1;
                queue.push_back(r2);
            }
        }
    }
    std::vector<int> covered;
    for (int r = 0; r < b.right; ++r)
        if (m.right_to_left[r] >= 0 && !col_seen[r]) covered.push_back(r);
    return covered;
}

BipartiteGraph state_output_pattern(const InferenceGraph& g) {
    const int n = g.node_count();
    BipartiteGraph b(n + static_cast<int>(g.sensors().size()), n);
    for (int i = 0; i < n; ++i)
        for (int j : g.in_neighbors(i)) b.add_edge(i, j);  // row i of A: nonzero at A_ij
    for (std::size_t k = 0; k < g.sensors().size(); ++k)
        b.add_edge(n + static_cast<int>(k), g.sensors()[k]);
    b.finalize();
    return b;
}

std::vector<int> dilation_free_targets(const InferenceGraph& g) {
    return columns_covered_by_all_max_matchings(state_output_pattern(g));
}

}  // namespace netobs::graph
