#include "netobs/netgen.hpp"

#include "netobs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace netobs::netgen {

void NetworkModel::normalize() {
    if (weights.empty()) {
        if (!directed)
            for (auto& e : edges)
                if (e.first > e.second) std::swap(e.first, e.second);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return;
    }
    std::vector<std::pair<std::pair<int, int>, double>> tagged(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto e = edges[i];
        if (!directed && e.first > e.second) std::swap(e.first, e.second);
        tagged[i] = {e, weights[i]};
    }
    std::sort(tagged.begin(), tagged.end());
    edges.clear();
    weights.clear();
    for (std::size_t i = 0; i < tagged.size(); ++i) {
        if (i > 0 && tagged[i].first == tagged[i - 1].first) continue;
        edges.push_back(tagged[i].first);
        weights.push_back(tagged[i].second);
    }
}

NetworkModel newman_watts(int N, int k, double p, std::uint64_t seed) {
    if (k < 1 || N <= k) throw InputError("newman_watts: need N > k >= 1");
    if (p < 0.0 || p > 1.0) throw InputError("newman_watts: p outside [0, 1]");
    Pcg32 rng = substream(seed, "netgen.sw");

    NetworkModel net;
    net.N = N;
    net.directed = false;
    std::set<std::pair<int, int>> present;
    auto add = [&](int a, int b) {
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        if (!present.insert({a, b}).second) return false;
        net.edges.emplace_back(a, b);
        return true;
    };
    // ring lattice: each vertex to its k nearest neighbors (ceil(k/2) on
    // each side; k even gives the symmetric ring with N*k/2 edges)
    int half = (k + 1) / 2;
    for (int i = 0; i < N; ++i)
        for (int d = 1; d <= half; ++d) add(i, (i + d) % N);
    // one shortcut candidate per ring edge
    std::size_t ring_edges = net.edges.size();
    for (std::size_t e = 0; e < ring_edges; ++e) {
        if (rng.next_double() >= p) continue;
        for (int attempt = 0; attempt < 64; ++attempt) {
            int a = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(N)));
            int b = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(N)));
            if (add(a, b)) break;
        }
    }
    net.normalize();
    return net;
}

NetworkModel barabasi_albert(int N, int m, std::uint64_t seed) {
    if (m < 1 || N <= m) throw InputError("barabasi_albert: need N > m >= 1");
    Pcg32 rng = substream(seed, "netgen.sf");

    NetworkModel net;
    net.N = N;
    net.directed = false;
    // endpoint list = degree-proportional sampling (Batagelj-Brandes)
    std::vector<int> endpoints;
    endpoints.reserve(static_cast<std::size_t>(2 * m) * static_cast<std::size_t>(N));
    for (int v = m; v < N; ++v) {
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < m) {
            int u = endpoints.empty()
                        ? static_cast<int>(rng.next_below(static_cast<std::uint32_t>(v)))
                        : endpoints[rng.next_below(static_cast<std::uint32_t>(endpoints.size()))];
            chosen.insert(u);
        }
        for (int u : chosen) {
            net.edges.emplace_back(u, v);
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    net.normalize();
    return net;
}

NetworkModel orient_randomly(const NetworkModel& net, std::uint64_t seed) {
    if (net.directed) throw InputError("orient_randomly: input already directed");
    Pcg32 rng = substream(seed, "netgen.orient");
    NetworkModel out;
    out.N = net.N;
    out.directed = true;
    out.edges.reserve(net.edges.size());
    for (auto [a, b] : net.edges) {
        if (rng.next_double() < 0.5)
            out.edges.emplace_back(a, b);
        else
            out.edges.emplace_back(b, a);
    }
    out.normalize();
    return out;
}

Matrix vertex_template() {
    Matrix Av(3, 3);
    Av << -1, -1,  0,
           1, -1,  0,
           1,  0, -1;
    return Av;
}

ExpandedSystem expand_subsystems(const NetworkModel& net, double lambda_lo, double lambda_hi,
                                 std::uint64_t seed) {
    const int N = net.N;
    Pcg32 rng = substream(seed, "netgen.expand");
    ExpandedSystem sysx;
    sysx.lambdas.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) sysx.lambdas[static_cast<std::size_t>(i)] = rng.uniform(lambda_lo, lambda_hi);

    Matrix Av = vertex_template();
    sysx.A = Matrix::Zero(3 * N, 3 * N);
    for (int i = 0; i < N; ++i)
        sysx.A.block(3 * i, 3 * i, 3, 3) = sysx.lambdas[static_cast<std::size_t>(i)] * Av;

    // L = D_out - W_out; coupling subtracts L on the second coordinate
    std::vector<int> outdeg(static_cast<std::size_t>(N), 0);
    auto couple = [&](int i, int j) {  // edge i -> j
        outdeg[static_cast<std::size_t>(i)] += 1;
        sysx.A(3 * i + 1, 3 * j + 1) += 1.0;  // -L_ij = +1 for i != j
    };
    for (auto [a, b] : net.edges) {
        couple(a, b);
        if (!net.directed) couple(b, a);
    }
    for (int i = 0; i < N; ++i) sysx.A(3 * i + 1, 3 * i + 1) -= outdeg[static_cast<std::size_t>(i)];

    sysx.first_coords.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) sysx.first_coords[static_cast<std::size_t>(i)] = 3 * i;
    return sysx;
}

double generalized_clustering_pattern(int n, const std::vector<std::pair<int, int>>& edges) {
    // symmetrized binary pattern with self-edges retained
    std::vector<std::set<int>> nbr(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) {
        nbr[static_cast<std::size_t>(a)].insert(b);
        nbr[static_cast<std::size_t>(b)].insert(a);
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& ni = nbr[static_cast<std::size_t>(i)];
        if (ni.empty()) continue;  // k_i = 0 contributes 0 by convention
        long closed = 0;
        for (int j : ni) {
            const auto& nj = nbr[static_cast<std::size_t>(j)];
            for (int k : nj)
                if (ni.count(k)) ++closed;  // S_ij S_jk S_ki over j, k
        }
        double ki = static_cast<double>(ni.size());
        total += static_cast<double>(closed) / (ki * ki);
    }
    return total / static_cast<double>(n);
}

double generalized_clustering(const Matrix& A) {
    if (A.rows() != A.cols()) throw InputError("generalized_clustering: matrix not square");
    std::vector<std::pair<int, int>> edges;
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0.0) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return generalized_clustering_pattern(static_cast<int>(A.rows()), edges);
}

NetworkModel load_edge_list(const std::filesystem::path& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw InputError("load_edge_list: cannot open " + path.string());
    NetworkModel net;
    net.directed = directed;
    std::string line;
    int lineno = 0;
    int max_node = -1;
    bool any_weight = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long a, b;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> b)) {
            throw InputError("load_edge_list: line " + std::to_string(lineno) +
                             ": expected `src dst [weight]`");
        }
        double w;
        bool has_w = static_cast<bool>(ls >> w);
        std::string rest;
        if (ls >> rest)
            throw InputError("load_edge_list: line " + std::to_string(lineno) +
                             ": trailing tokens");
        if (a < 0 || b < 0 || a > 0x7fffffffLL || b > 0x7fffffffLL)
            throw InputError("load_edge_list: line " + std::to_string(lineno) +
                             ": index out of range");
        net.edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
        if (has_w) {
            any_weight = true;
            net.weights.resize(net.edges.size() - 1, 1.0);
            net.weights.push_back(w);
        } else if (any_weight) {
            net.weights.push_back(1.0);
        }
        max_node = std::max<long long>({max_node, a, b});
    }
    net.N = max_node + 1;
    net.normalize();
    return net;
}

void save_edge_list(const NetworkModel& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("save_edge_list: cannot open " + path.string());
    NetworkModel copy = net;
    copy.normalize();
    char buf[40];
    for (std::size_t i = 0; i < copy.edges.size(); ++i) {
        out << copy.edges[i].first << ' ' << copy.edges[i].second;
        if (!copy.weights.empty()) {
            std::snprintf(buf, sizeof buf, "%.17g", copy.weights[i]);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

}  // namespace netobs::netgen
