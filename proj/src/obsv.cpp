#include "netobs/obsv.hpp"

#include "netobs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace netobs::obsv {

void NumericSystem::validate() const {
    const Index nn = A.rows();
    if (A.cols() != nn) throw InputError("NumericSystem: A not square");
    if (B.size() > 0 && B.rows() != nn) throw InputError("NumericSystem: B row mismatch");
    if (C.cols() != nn || F.cols() != nn) throw InputError("NumericSystem: C/F column mismatch");
    selection_nodes(C);
    selection_nodes(F);
}

Matrix selection_matrix(const NodeSet& nodes, Index n, const std::vector<double>& values) {
    if (!values.empty() && values.size() != nodes.size())
        throw InputError("selection_matrix: values size mismatch");
    Matrix m = Matrix::Zero(static_cast<Index>(nodes.size()), n);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] < 0 || nodes[k] >= n) throw InputError("selection_matrix: node out of range");
        m(static_cast<Index>(k), nodes[k]) = values.empty() ? 1.0 : values[k];
    }
    return m;
}

NodeSet selection_nodes(const Matrix& m) {
    NodeSet nodes;
    nodes.reserve(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
        int nz = -1;
        for (Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) != 0.0) {
                if (nz >= 0) throw InputError("selection row has more than one nonzero entry");
                nz = static_cast<int>(j);
            }
        }
        if (nz < 0) throw InputError("selection row is all zero");
        nodes.push_back(nz);
    }
    return nodes;
}

Matrix observability_matrix(const Matrix& A, const Matrix& C, int cap) {
    const Index n = A.rows();
    if (A.cols() != n || C.cols() != n) throw InputError("observability_matrix: dims");
    if (n > cap) {
        std::ostringstream os;
        os << "observability_matrix: n = " << n << " exceeds the dense cap " << cap
           << "; use the structural or PBH/Gramian tests instead";
        throw InputError(os.str());
    }
    const Index q = C.rows();
    Matrix O(n * q, n);
    Matrix block = C;
    for (Index k = 0; k < n; ++k) {
        O.middleRows(k * q, q) = block;
        if (k + 1 < n) block = block * A;
    }
    return O;
}

namespace {
// Scale each nonzero row to unit norm: preserves the row space exactly and
// keeps the powers C A^k from dwarfing the rank tolerance.
Matrix normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (Index i = 0; i < out.rows(); ++i) {
        double nrm = out.row(i).norm();
        if (nrm > 0.0) out.row(i) /= nrm;
    }
    return out;
}
}  // namespace

bool is_functionally_observable_numeric(const NumericSystem& sys, std::optional<double> tol,
                                        int cap) {
    Matrix O = observability_matrix(sys.A, sys.C, cap);
    Matrix OF(O.rows() + sys.F.rows(), O.cols());
    OF << O, sys.F;
    return linalg::numeric_rank(normalize_rows(OF), tol) ==
           linalg::numeric_rank(normalize_rows(O), tol);
}

namespace {
int rank_pencil(const Matrix& A, const Matrix& C, const Matrix* F, Complex lambda,
                std::optional<double> tol) {
    const Index n = A.rows();
    const Index extra = C.rows() + (F ? F->rows() : 0);
    CMatrix M(n + extra, n);
    M.topRows(n) = A.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    M.middleRows(n, C.rows()) = C.cast<Complex>();
    if (F) M.bottomRows(F->rows()) = F->cast<Complex>();
    return linalg::numeric_rank(M, tol);
}
}  // namespace

bool pbh_functional_check(const NumericSystem& sys, std::optional<double> tol, int cap) {
    if (sys.n() > cap) throw InputError("pbh_functional_check: n exceeds cap");
    CVector evs = linalg::eigenvalues(sys.A);
    for (Index k = 0; k < evs.size(); ++k) {
        if (rank_pencil(sys.A, sys.C, &sys.F, evs(k), tol) !=
            rank_pencil(sys.A, sys.C, nullptr, evs(k), tol))
            return false;
    }
    return true;
}

DarouachReport check_darouach(const Matrix& A, const Matrix& C, const Matrix& F0,
                              std::optional<double> tol, EigenvalueScope scope) {
    const Index n = A.rows();
    if (C.cols() != n || F0.cols() != n) throw InputError("check_darouach: dims");
    DarouachReport rep;

    Matrix CA = C * A;
    Matrix F0A = F0 * A;
    Matrix base(2 * C.rows() + F0.rows(), n);  // [C; CA; F0]
    base << C, CA, F0;
    Matrix aug(base.rows() + F0.rows(), n);    // [C; CA; F0; F0 A]
    aug << C, CA, F0, F0A;
    rep.cond4 = linalg::numeric_rank(normalize_rows(aug), tol) ==
                linalg::numeric_rank(normalize_rows(base), tol);

    const int rhs_rank = linalg::numeric_rank(normalize_rows(base), tol);
    rep.cond5 = true;
    CVector evs = linalg::eigenvalues(A);
    std::vector<Complex> checked;
    for (Index k = 0; k < evs.size(); ++k) {
        Complex lam = evs(k);
        if (scope == EigenvalueScope::nonnegative_real_part && lam.real() < 0.0) continue;
        // skip near-duplicates (conjugate pairs both appear; identical
        // eigenvalues give identical tests)
        bool dup = false;
        for (const Complex& c : checked)
            if (std::abs(c - lam) < 1e-9 * (1.0 + std::abs(lam))) dup = true;
        if (dup) continue;
        checked.push_back(lam);

        CMatrix lhs(F0.rows() + 2 * C.rows(), n);
        lhs.topRows(F0.rows()) = lam * F0.cast<Complex>() - F0A.cast<Complex>();
        lhs.middleRows(F0.rows(), C.rows()) = CA.cast<Complex>();
        lhs.bottomRows(C.rows()) = C.cast<Complex>();
        for (Index i = 0; i < lhs.rows(); ++i) {
            double nrm = lhs.row(i).norm();
            if (nrm > 0.0) lhs.row(i) /= nrm;
        }
        if (linalg::numeric_rank(lhs, tol) != rhs_rank) {
            rep.cond5 = false;
            rep.failing_eigenvalues.push_back(lam);
        }
    }
    return rep;
}

std::vector<int> uncovered_targets(const graph::InferenceGraph& g) {
    std::set<int> sensor_set(g.sensors().begin(), g.sensors().end());
    std::vector<int> bad;
    for (int t : g.targets()) {
        bool covered = false;
        for (int w : graph::reachable_from(g, t)) {
            if (sensor_set.count(w)) {
                covered = true;
                break;
            }
        }
        if (!covered) bad.push_back(t);
    }
    return bad;
}

bool is_structurally_functionally_observable(const graph::InferenceGraph& g) {
    if (!uncovered_targets(g).empty()) return false;
    std::vector<int> free = graph::dilation_free_targets(g);
    std::set<int> free_set(free.begin(), free.end());
    for (int t : g.targets())
        if (!free_set.count(t)) return false;
    return true;
}

bool is_structurally_observable(const graph::InferenceGraph& g) {
    NodeSet all(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) all[i] = i;
    std::vector<std::pair<int, int>> edges;
    for (int j = 0; j < g.node_count(); ++j)
        for (int i : g.out_neighbors(j)) edges.emplace_back(j, i);
    graph::InferenceGraph gx(g.node_count(), edges, g.sensors(), all);
    return is_structurally_functionally_observable(gx);
}

Vector gramian_target_reconstruction(const NumericSystem& sys, const Matrix& y_trace, double t1) {
    const Index n = sys.n();
    const Index q = sys.q();
    if (y_trace.cols() != q) throw InputError("gramian: y_trace must have q columns");
    const Index steps = y_trace.rows();
    if (steps < 3 || (steps % 2) == 0)
        throw InputError("gramian: need an odd number of samples >= 3 (composite Simpson)");
    if (!(t1 > 0.0)) throw InputError("gramian: t1 must be positive");
    const double h = t1 / static_cast<double>(steps - 1);

    // March e^{A tau} across the grid once; Simpson-accumulate both the
    // Gramian and the output integral.
    Matrix Edt = linalg::expm(sys.A * h);
    Matrix Phi = Matrix::Identity(n, n);
    Matrix W = Matrix::Zero(n, n);
    Vector b = Vector::Zero(n);
    for (Index k = 0; k < steps; ++k) {
        double wgt = (k == 0 || k == steps - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        Matrix CPhi = sys.C * Phi;                       // q x n
        W.noalias() += wgt * (CPhi.transpose() * CPhi);  // e^{A't} C'C e^{At}
        b.noalias() += wgt * (CPhi.transpose() * y_trace.row(k).transpose());
        if (k + 1 < steps) Phi = Edt * Phi;
    }
    W *= h / 3.0;
    b *= h / 3.0;

    // K W = F in least squares; reject when F is outside row(W).
    Matrix Wp = linalg::pseudoinverse(W);
    Matrix K = sys.F * Wp;
    double mismatch = (K * W - sys.F).norm() / (1.0 + sys.F.norm());
    if (mismatch > 1e-6)
        throw NumericError("gramian: target rows outside the Gramian row space "
                           "(system not functionally observable at this horizon)");
    return K * b;
}

TargetContrastReport target_controllability_contrast(const NumericSystem& sys, int cap) {
    TargetContrastReport rep;
    Matrix O = observability_matrix(sys.A, sys.C, cap);
    Matrix OFt = O * sys.F.transpose();
    rep.rank_OFt = linalg::numeric_rank(OFt);
    Matrix OF(O.rows() + sys.F.rows(), O.cols());
    OF << O, sys.F;
    rep.functional_obsv = linalg::numeric_rank(normalize_rows(OF)) ==
                          linalg::numeric_rank(normalize_rows(O));
    return rep;
}

}  // namespace netobs::obsv
