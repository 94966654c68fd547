#pragma once

#include "netobs/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace netobs::netgen {

struct NetworkModel {
    int N = 0;
    bool directed = false;
    std::vector<std::pair<int, int>> edges;  // sorted, no duplicates
    std::vector<double> weights;             // optional, parallel to edges

    std::size_t edge_count() const { return edges.size(); }
    void normalize();  // sort edges (and undirected pairs) canonically
};

/// Newman-Watts small world: ring of k nearest neighbors; for each ring
/// edge, with probability p, one shortcut between a random vertex pair
/// (duplicates and self-loops rejected: simple graph).
NetworkModel newman_watts(int N, int k, double p, std::uint64_t seed);

/// Barabasi-Albert preferential attachment: each new vertex attaches to m
/// distinct existing vertices with degree-proportional probability.
NetworkModel barabasi_albert(int N, int m, std::uint64_t seed);

/// Assign a fair-coin direction to every edge of an undirected network.
NetworkModel orient_randomly(const NetworkModel& net, std::uint64_t seed);

// 3N x 3N system matrix from a network: block diag(lambda_i * Av) minus the
// Laplacian coupling on each vertex's second coordinate.
struct ExpandedSystem {
    Matrix A;
    NodeSet first_coords;  // sensor/target-eligible state indices (3i)
    std::vector<double> lambdas;
};

/// lambda_i ~ U[lambda_range] per vertex (seeded). Directed networks use
/// the out-degree Laplacian L_ij = outdeg(i) delta_ij - [edge i->j].
ExpandedSystem expand_subsystems(const NetworkModel& net, double lambda_lo, double lambda_hi,
                                 std::uint64_t seed);

/// The 3x3 subsystem template.
Matrix vertex_template();

/// Generalized clustering on the symmetrized pattern of A (self-edges
/// included): (1/n) sum_ijk S_ij S_jk S_ki / k_i^2, with isolated nodes
/// contributing zero.
double generalized_clustering(const Matrix& A);
double generalized_clustering_pattern(int n, const std::vector<std::pair<int, int>>& edges);

/// Edge-list text I/O: one `src dst [weight]` per line, 0-based indices,
/// `#` comments, blank lines ignored. Directedness comes from the caller.
NetworkModel load_edge_list(const std::filesystem::path& path, bool directed);
void save_edge_list(const NetworkModel& net, const std::filesystem::path& path);

}  // namespace netobs::netgen
