#include "netobs/design.hpp"

#include "netobs/linalg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace netobs::design {

using nlohmann::json;

NodeSet minimal_f0(const graph::InferenceGraph& g, std::string* warning) {
    if (!obsv::is_structurally_functionally_observable(g))
        throw InfeasibleError("minimal_f0: triple is not structurally functionally observable");
    if (warning) {
        std::ostringstream os;
        for (int t : g.targets())
            if (!g.has_self_link(t)) os << "target " << t << " has no self-link; ";
        *warning = os.str();
    }

    const int n = g.node_count();
    const int q = static_cast<int>(g.sensors().size());

    // Bipartite pattern of [C; CA; F0]. Rows 0..q-1: C (sensor selections);
    // rows q..2q-1: CA (in-neighborhoods of sensors); rows 2q..: one
    // selection row per F0 node. F0 rows grow; the matching is maintained
    // incrementally (each new row touches a single column, so one
    // augmenting-path search keeps it maximum).
    NodeSet f0 = g.targets();
    graph::BipartiteGraph b(2 * q + static_cast<int>(f0.size()), n);
    for (int k = 0; k < q; ++k) {
        int s = g.sensors()[k];
        b.add_edge(k, s);
        for (int j : g.in_neighbors(s)) b.add_edge(q + k, j);
    }
    for (std::size_t k = 0; k < f0.size(); ++k)
        b.add_edge(2 * q + static_cast<int>(k), f0[k]);
    b.finalize();

    graph::Matching m = graph::maximum_matching(b);

    // Augmenting-path search from a newly appended row (plain alternating
    // DFS; one call per appended row keeps the matching maximum).
    auto try_augment = [&](int row) {
        std::vector<char> row_seen(b.adj.size(), 0);
        std::vector<int> parent_row_of_col(b.right, -1);
        row_seen[row] = 1;
        // iterative DFS over alternating paths
        std::vector<std::pair<int, std::size_t>> frames{{row, 0}};
        while (!frames.empty()) {
            auto& [l, idx] = frames.back();
            if (idx >= b.adj[l].size()) {
                frames.pop_back();
                continue;
            }
            int c = b.adj[l][idx++];
            if (parent_row_of_col[c] >= 0) continue;
            parent_row_of_col[c] = l;
            int l2 = m.right_to_left[c];
            if (l2 < 0) {
                // free column: flip the path back to `row`
                int col = c;
                while (true) {
                    int pr = parent_row_of_col[col];
                    int prev = m.left_to_right[pr];
                    m.left_to_right[pr] = col;
                    m.right_to_left[col] = pr;
                    if (pr == row) break;
                    col = prev;
                }
                ++m.size;
                return true;
            }
            if (!row_seen[l2]) {
                row_seen[l2] = 1;
                frames.emplace_back(l2, 0);
            }
        }
        return false;
    };

    std::set<int> in_f0(f0.begin(), f0.end());
    for (int guard = 0; guard <= n; ++guard) {
        std::vector<int> covered = graph::columns_covered_by_all_max_matchings(b, m);
        std::vector<char> covered_mask(n, 0);
        for (int c : covered) covered_mask[c] = 1;

        // M2: structural nonzero columns of F0 A = influencers of F0 nodes
        int pick = -1;
        for (int v : f0) {
            for (int j : g.in_neighbors(v)) {
                if (!covered_mask[j] && (pick < 0 || j < pick)) pick = j;
            }
        }
        if (pick < 0) {
            NodeSet out = f0;
            return out;
        }
        if (in_f0.count(pick))
            throw NumericError("minimal_f0: internal error, re-proposed an existing row");
        f0.push_back(pick);
        in_f0.insert(pick);
        int new_row = b.left;
        b.left += 1;
        b.adj.push_back({pick});
        m.left_to_right.push_back(-1);
        try_augment(new_row);
    }
    throw NumericError("minimal_f0: failed to terminate (inconsistent structure)");
}

Matrix place_poles_lqr(const Matrix& X, const Matrix& Y, double alpha, double q_scale,
                       double r_scale) {
    const Index m = X.rows();
    if (X.cols() != m || Y.rows() != m) throw InputError("place_poles_lqr: dims");
    Matrix Q = q_scale * Matrix::Identity(m, m);
    Matrix R = r_scale * Matrix::Identity(Y.cols(), Y.cols());
    // Shift so the CARE's closed loop puts every eigenvalue of X' - G Y'
    // left of alpha. (Methods' "X <- X + alpha I" with alpha = -100 is read
    // as this shift: the literal sign would leave the pair already stable
    // and the gain near zero.)
    Matrix Xs = X - alpha * Matrix::Identity(m, m);
    Matrix P = linalg::solve_care(Xs, Y, Q, R);
    return (Y.transpose() * P / r_scale).transpose();
}

namespace {

struct TransformBlocks {
    Matrix P, Pinv;
    Matrix A11, A12, A21, A22;
    Matrix B1, B2;  // blocks of P^-1 B
};

TransformBlocks build_blocks(const obsv::NumericSystem& sys) {
    const Index n = sys.n();
    const Index q = sys.q();
    Matrix Cp = linalg::pseudoinverse(sys.C);
    Matrix Cperp = linalg::kernel_basis(sys.C);
    if (Cperp.cols() != n - q)
        throw NumericError("observer design: C is not full row rank");
    TransformBlocks tb;
    tb.P.resize(n, n);
    tb.P << Cp, Cperp;
    // For single-nonzero rows of C (required of NumericSystem), P^-1 is
    // [C; Cperp'] exactly; fall back to LU otherwise.
    tb.Pinv.resize(n, n);
    tb.Pinv.topRows(q) = sys.C;
    tb.Pinv.bottomRows(n - q) = Cperp.transpose();
    if ((tb.Pinv * tb.P - Matrix::Identity(n, n)).norm() > 1e-8)
        tb.Pinv = tb.P.partialPivLu().inverse();

    Matrix Abar = tb.Pinv * sys.A * tb.P;
    tb.A11 = Abar.topLeftCorner(q, q);
    tb.A12 = Abar.topRightCorner(q, n - q);
    tb.A21 = Abar.bottomLeftCorner(n - q, q);
    tb.A22 = Abar.bottomRightCorner(n - q, n - q);

    Matrix B = sys.B.size() ? sys.B : Matrix::Ones(n, 1);
    Matrix Bbar = tb.Pinv * B;
    tb.B1 = Bbar.topRows(q);
    tb.B2 = Bbar.bottomRows(n - q);
    return tb;
}

}  // namespace

ObserverRealization design_functional_observer(const obsv::NumericSystem& sys,
                                               const NodeSet& f0_nodes, double alpha,
                                               double q_scale, double r_scale) {
    sys.validate();
    const Index n = sys.n();
    const Index q = sys.q();
    const Index r0 = static_cast<Index>(f0_nodes.size());

    Matrix F0 = obsv::selection_matrix(f0_nodes, n);
    // keep the original F values on the first r rows so z_hat tracks F x
    NodeSet f_nodes = obsv::selection_nodes(sys.F);
    for (Index i = 0; i < sys.F.rows(); ++i) {
        if (i >= r0 || f_nodes[static_cast<std::size_t>(i)] != f0_nodes[static_cast<std::size_t>(i)])
            throw InputError("design_functional_observer: f0_nodes must start with the target "
                             "nodes in F's row order");
        F0.row(i) = sys.F.row(i);
    }

    obsv::DarouachReport rep = obsv::check_darouach(sys.A, sys.C, F0, std::nullopt,
                                                    obsv::EigenvalueScope::nonnegative_real_part);
    if (!rep.ok()) {
        std::ostringstream os;
        os << "design_functional_observer: Darouach conditions fail (cond4=" << rep.cond4
           << ", cond5=" << rep.cond5 << ")";
        throw InfeasibleError(os.str());
    }

    TransformBlocks tb = build_blocks(sys);
    Matrix F1 = F0 * tb.P.leftCols(q);
    Matrix F2 = F0 * tb.P.rightCols(n - q);

    Matrix F2perp = linalg::kernel_basis(F2);    // (n-q) x (n-q-rank F2)
    Matrix F2pinv = linalg::pseudoinverse(F2);   // (n-q) x r0
    Matrix Omega = tb.A12 * F2perp;              // q x k
    Matrix Phi = -(F2 * tb.A22 * F2perp);        // r0 x k
    Matrix OmegaPinv = linalg::pseudoinverse(Omega);

    Matrix N1 = (Phi * OmegaPinv * tb.A12 + F2 * tb.A22) * F2pinv;
    Matrix N2 = (Omega * OmegaPinv - Matrix::Identity(q, q)) * tb.A12 * F2pinv;

    Matrix Z = place_poles_lqr(N1.transpose(), N2.transpose(), alpha, q_scale, r_scale);
    Matrix N = N1 - Z * N2;
    double rightmost = linalg::max_real_eigenvalue(N);
    if (rightmost > alpha + 1e-3 * std::abs(alpha)) {
        std::ostringstream os;
        os << "design_functional_observer: N not placed (right-most eigenvalue " << rightmost
           << " > " << alpha << ")";
        throw NumericError(os.str());
    }

    ObserverRealization obs;
    obs.kind = "functional";
    obs.r0 = static_cast<int>(r0);
    obs.alpha = alpha;
    obs.f0_nodes = f0_nodes;
    obs.T1 = Phi * OmegaPinv + Z * (Matrix::Identity(q, q) - Omega * OmegaPinv);
    obs.T2 = F2;
    obs.Pinv = tb.Pinv;
    obs.N = N;
    obs.J = obs.T1 * tb.A11 + obs.T2 * tb.A21 - N * obs.T1;
    obs.H = obs.T1 * tb.B1 + obs.T2 * tb.B2;  // [T1 T2] P^-1 B in original coordinates
    obs.D = Matrix::Identity(r0, r0);
    obs.E = F1 - obs.T1;
    return obs;
}

ObserverRealization design_luenberger(const obsv::NumericSystem& sys, double alpha,
                                      double q_scale, double r_scale) {
    sys.validate();
    const Index n = sys.n();
    const Index q = sys.q();
    if (n <= obsv::kDefaultDenseCap) {
        obsv::NumericSystem full = sys;
        full.F = Matrix::Identity(n, n);
        if (!obsv::is_functionally_observable_numeric(full))
            throw InfeasibleError("design_luenberger: (A, C) is not observable");
    }  // above the dense cap the CARE itself certifies detectability at the shift

    TransformBlocks tb = build_blocks(sys);
    Matrix E = place_poles_lqr(tb.A22.transpose(), tb.A12.transpose(), alpha, q_scale, r_scale);
    Matrix N = tb.A22 - E * tb.A12;
    double rightmost = linalg::max_real_eigenvalue(N);
    if (rightmost > alpha + 1e-3 * std::abs(alpha)) {
        std::ostringstream os;
        os << "design_luenberger: N not placed (right-most eigenvalue " << rightmost << ")";
        throw NumericError(os.str());
    }

    ObserverRealization obs;
    obs.kind = "luenberger";
    obs.r0 = static_cast<int>(n - q);
    obs.alpha = alpha;
    obs.N = N;
    obs.J = tb.A21 - E * tb.A11 + N * E;
    obs.H = tb.B2 - E * tb.B1;
    obs.D = Matrix::Identity(n - q, n - q);
    obs.E = E;
    obs.T1 = E;  // w tracks xbar2 - E y = [E I] ... kept for consistent_state
    obs.T2 = Matrix::Identity(n - q, n - q);
    obs.Pinv = tb.Pinv;
    return obs;
}

Vector ObserverRealization::consistent_state(const Vector& x) const {
    Vector xbar = Pinv * x;
    const Index q = T1.cols();
    if (kind == "luenberger") {
        // w = xbar2 - E y
        return xbar.tail(xbar.size() - q) - E * xbar.head(q);
    }
    return T1 * xbar.head(q) + T2 * xbar.tail(xbar.size() - q);
}

Matrix target_readout_D(const obsv::NumericSystem& sys, const ObserverRealization& obs) {
    if (obs.kind == "functional") {
        Matrix sel = Matrix::Zero(sys.r(), obs.r0);
        sel.topLeftCorner(sys.r(), sys.r()) = Matrix::Identity(sys.r(), sys.r());
        return sel * obs.D;
    }
    Matrix Cperp = linalg::kernel_basis(sys.C);
    return sys.F * Cperp * obs.D;
}

Matrix target_readout_E(const obsv::NumericSystem& sys, const ObserverRealization& obs) {
    if (obs.kind == "functional") {
        Matrix sel = Matrix::Zero(sys.r(), obs.r0);
        sel.topLeftCorner(sys.r(), sys.r()) = Matrix::Identity(sys.r(), sys.r());
        return sel * obs.E;
    }
    Matrix Cp = linalg::pseudoinverse(sys.C);
    Matrix Cperp = linalg::kernel_basis(sys.C);
    return sys.F * Cp + sys.F * Cperp * obs.E;
}

namespace {
json matrix_to_json(const Matrix& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            data[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
    Index rows = j.at("rows").get<Index>();
    Index cols = j.at("cols").get<Index>();
    auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != rows * cols)
        throw InputError("matrix json: size mismatch");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j2 = 0; j2 < cols; ++j2)
            m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
    return m;
}
}  // namespace

std::string to_json(const ObserverRealization& obs) {
    json j{{"kind", obs.kind},
           {"r0", obs.r0},
           {"alpha", obs.alpha},
           {"F0_nodes", obs.f0_nodes},
           {"N", matrix_to_json(obs.N)},
           {"J", matrix_to_json(obs.J)},
           {"H", matrix_to_json(obs.H)},
           {"D", matrix_to_json(obs.D)},
           {"E", matrix_to_json(obs.E)}};
    return j.dump(2);
}

ObserverRealization observer_from_json(const std::string& text) {
    json j = json::parse(text);
    ObserverRealization obs;
    obs.kind = j.at("kind").get<std::string>();
    obs.r0 = j.at("r0").get<int>();
    obs.alpha = j.at("alpha").get<double>();
    obs.f0_nodes = j.at("F0_nodes").get<NodeSet>();
    obs.N = matrix_from_json(j.at("N"));
    obs.J = matrix_from_json(j.at("J"));
    obs.H = matrix_from_json(j.at("H"));
    obs.D = matrix_from_json(j.at("D"));
    obs.E = matrix_from_json(j.at("E"));
    return obs;
}

}  // namespace netobs::design
