#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here are deliberately naive (exhaustive enumeration, exact rational
// arithmetic, boolean closure) and never call the implementation paths they
// check.

#include "netobs/common.hpp"
#include "netobs/graph.hpp"
#include "netobs/obsv.hpp"
#include "netobs/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

namespace testutil {

using namespace netobs;

// ---------------------------------------------------------------- fixtures

// G4: x1->x3, x2->x3, x3->x4; sensors {x4}; targets {x2} (0-based: 3 and 1).
inline graph::InferenceGraph g4(NodeSet targets = {1}) {
    return graph::InferenceGraph(4, {{0, 2}, {1, 2}, {2, 3}}, {3}, std::move(targets));
}

inline Matrix g4_A(double a31 = 1.0, double a32 = 1.0, double a43 = 1.0) {
    Matrix A = Matrix::Zero(4, 4);
    A(2, 0) = a31;
    A(2, 1) = a32;
    A(3, 2) = a43;
    return A;
}

// CHAIN5: x1->x2->...->x5 with self-links; sensor {x5}; target {x1}.
inline graph::InferenceGraph chain5() {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 5; ++i) e.emplace_back(i, i);
    for (int i = 0; i + 1 < 5; ++i) e.emplace_back(i, i + 1);
    return graph::InferenceGraph(5, e, {4}, {0});
}

inline Matrix chain5_A(double diag = -1.0, double chain = 1.0) {
    Matrix A = Matrix::Zero(5, 5);
    for (int i = 0; i < 5; ++i) A(i, i) = diag;
    for (int i = 0; i + 1 < 5; ++i) A(i + 1, i) = chain;
    return A;
}

// STAR4: leaves x1..x3 -> hub x4, self-links everywhere; targets = leaves.
inline graph::InferenceGraph star4() {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 4; ++i) e.emplace_back(i, i);
    for (int i = 0; i < 3; ++i) e.emplace_back(i, 3);
    return graph::InferenceGraph(4, e, {}, {0, 1, 2});
}

// PAIR2: x1->x2 with self-links; sensor {x2}; target {x1}.
inline graph::InferenceGraph pair2() {
    return graph::InferenceGraph(2, {{0, 0}, {1, 1}, {0, 1}}, {1}, {0});
}

// ------------------------------------------------------- random structures

inline graph::InferenceGraph random_graph(Pcg32& rng, int n, double edge_prob,
                                          int n_sensors, int n_targets,
                                          bool self_links_on_targets) {
    std::vector<std::pair<int, int>> edges;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (rng.next_double() < edge_prob) edges.emplace_back(j, i);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.next_below(static_cast<std::uint32_t>(i))]);
    NodeSet sensors(perm.begin(), perm.begin() + n_sensors);
    NodeSet targets(perm.begin() + n_sensors, perm.begin() + n_sensors + n_targets);
    std::sort(sensors.begin(), sensors.end());
    std::sort(targets.begin(), targets.end());
    if (self_links_on_targets)
        for (int t : targets) edges.emplace_back(t, t);
    return graph::InferenceGraph(n, edges, sensors, targets);
}

/// U[0.5, 1.5] realization of the graph's structure (sensor/target rows
/// get value 1 entries).
inline obsv::NumericSystem realize(const graph::InferenceGraph& g, Pcg32& rng) {
    const int n = g.node_count();
    obsv::NumericSystem sys;
    sys.A = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i : g.out_neighbors(j)) sys.A(i, j) = rng.uniform(0.5, 1.5);
    sys.B = Matrix::Ones(n, 1);
    sys.C = obsv::selection_matrix(g.sensors(), n);
    sys.F = obsv::selection_matrix(g.targets(), n);
    return sys;
}

// ------------------------------------------------------------ rank oracles

/// Exact rank over the rationals via fraction-free Gaussian elimination
/// (Bareiss) on a scaled integer copy. Entries must be exactly
/// representable small rationals; we use it on integer-valued matrices.
inline int exact_integer_rank(Matrix m) {
    const Index rows = m.rows(), cols = m.cols();
    int rank = 0;
    Index rr = 0;
    for (Index c = 0; c < cols && rr < rows; ++c) {
        Index piv = -1;
        for (Index i = rr; i < rows; ++i)
            if (m(i, c) != 0.0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        m.row(piv).swap(m.row(rr));
        for (Index i = rr + 1; i < rows; ++i) {
            if (m(i, c) == 0.0) continue;
            // fraction-free elimination keeps exactness for integer inputs
            m.row(i) = m.row(i) * m(rr, c) - m.row(rr) * m(i, c);
        }
        ++rr;
        ++rank;
    }
    return rank;
}

// ------------------------------------------------------- matching oracles

/// Exhaustive maximum matching by bitmask DP over used columns.
inline int max_matching_exhaustive(const graph::BipartiteGraph& b) {
    if (b.right > 20) throw std::runtime_error("oracle limited to 20 columns");
    std::vector<int> best(1u << b.right, -1);
    best[0] = 0;
    int answer = 0;
    // process rows one at a time; state = used-column mask
    std::vector<int> cur(1u << b.right, -1), nxt;
    cur.assign(1u << b.right, -1);
    cur[0] = 0;
    for (int l = 0; l < b.left; ++l) {
        nxt = cur;  // skipping row l
        for (std::size_t mask = 0; mask < cur.size(); ++mask) {
            if (cur[mask] < 0) continue;
            for (int c : b.adj[static_cast<std::size_t>(l)]) {
                if (mask & (1u << c)) continue;
                std::size_t m2 = mask | (1u << c);
                if (nxt[m2] < cur[mask] + 1) nxt[m2] = cur[mask] + 1;
            }
        }
        cur.swap(nxt);
    }
    for (int v : cur) answer = std::max(answer, v);
    return answer;
}

/// Columns covered by every maximum matching, by the exhaustive oracle:
/// column c is avoidable iff deleting it leaves the maximum unchanged.
inline std::vector<int> covered_columns_exhaustive(const graph::BipartiteGraph& b) {
    int full = max_matching_exhaustive(b);
    std::vector<int> covered;
    for (int c = 0; c < b.right; ++c) {
        graph::BipartiteGraph cut(b.left, b.right);
        for (int l = 0; l < b.left; ++l)
            for (int r : b.adj[static_cast<std::size_t>(l)])
                if (r != c) cut.add_edge(l, r);
        cut.finalize();
        if (max_matching_exhaustive(cut) < full) covered.push_back(c);
    }
    return covered;
}

// ------------------------------------------------- dilation-set enumeration

/// Union of all minimal dilation sets of G(A, C), by direct enumeration of
/// the definition |T(V')| < |V'| over all node subsets (n <= ~16).
inline std::vector<int> dilation_union_exhaustive(const graph::InferenceGraph& g) {
    const int n = g.node_count();
    const int ns = static_cast<int>(g.sensors().size());
    auto out_size = [&](unsigned subset) {
        std::set<int> t;
        for (int v = 0; v < n; ++v) {
            if (!(subset & (1u << v))) continue;
            for (int w : g.out_neighbors(v)) t.insert(w);
            for (int k = 0; k < ns; ++k)
                if (g.sensors()[static_cast<std::size_t>(k)] == v) t.insert(n + k);
        }
        return static_cast<int>(t.size());
    };
    auto has_dilation = [&](unsigned subset) {
        int cnt = __builtin_popcount(subset);
        return out_size(subset) < cnt;
    };
    // a subset is a minimal dilation set iff it has a dilation and no
    // proper subset has one
    std::vector<char> any_sub_dilated(1u << n, 0);
    std::vector<int> member(n, 0);
    for (unsigned s = 1; s < (1u << n); ++s) {
        bool sub = false;
        for (int v = 0; v < n && !sub; ++v)
            if (s & (1u << v)) sub = any_sub_dilated[s & ~(1u << v)] != 0;
        bool self = has_dilation(s);
        any_sub_dilated[s] = (sub || self) ? 1 : 0;
        if (self && !sub) {
            for (int v = 0; v < n; ++v)
                if (s & (1u << v)) member[v] = 1;
        }
    }
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
        if (member[v]) out.push_back(v);
    return out;
}

// --------------------------------------------------------------- reach

/// Transitive closure by boolean matrix powering (reachability oracle).
inline std::vector<std::vector<char>> closure_oracle(const graph::InferenceGraph& g) {
    const int n = g.node_count();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) reach[i][i] = 1;
    for (int j = 0; j < n; ++j)
        for (int i : g.out_neighbors(j)) reach[j][i] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = 1;
    return reach;
}

}  // namespace testutil
