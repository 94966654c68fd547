#include "netobs/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>

namespace netobs::linalg {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename MatT>
Eigen::JacobiSVD<MatT> svd_of(const MatT& m, unsigned options = 0) {
    Eigen::JacobiSVD<MatT> svd(m, options);
    if (m.size() > 0 && !svd.singularValues().allFinite())
        throw NumericError("SVD produced non-finite singular values");
    return svd;
}
}  // namespace

double auto_rank_tol(const Matrix& m, double sigma_max) {
    return static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max * kEps * 64.0;
}

int numeric_rank(const Matrix& m, std::optional<double> tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    auto svd = svd_of(m);
    const auto& sv = svd.singularValues();
    double t = tol.value_or(auto_rank_tol(m, sv.size() ? sv(0) : 0.0));
    int r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > t) ++r;
    return r;
}

int numeric_rank(const CMatrix& m, std::optional<double> tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& sv = svd.singularValues();
    if (m.size() > 0 && !sv.allFinite()) throw NumericError("complex SVD non-finite");
    double t = tol.value_or(static_cast<double>(std::max(m.rows(), m.cols())) *
                            (sv.size() ? sv(0) : 0.0) * kEps * 64.0);
    int r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > t) ++r;
    return r;
}

Matrix pseudoinverse(const Matrix& m, std::optional<double> tol) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
    auto svd = svd_of(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double t = tol.value_or(auto_rank_tol(m, sv.size() ? sv(0) : 0.0));
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > t) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix kernel_basis(const Matrix& m, std::optional<double> tol) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix::Identity(m.cols(), m.cols());
    auto svd = svd_of(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double t = tol.value_or(auto_rank_tol(m, sv.size() ? sv(0) : 0.0));
    int r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > t) ++r;
    return svd.matrixV().rightCols(m.cols() - r);
}

CVector eigenvalues(const Matrix& m) {
    if (m.rows() != m.cols()) throw InputError("eigenvalues: matrix not square");
    if (m.rows() == 0) return CVector(0);
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("eigenvalue iteration did not converge");
    return es.eigenvalues();
}

double max_real_eigenvalue(const Matrix& m) {
    CVector ev = eigenvalues(m);
    double mx = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) mx = std::max(mx, ev(i).real());
    return mx;
}

bool is_hurwitz(const Matrix& m, double margin) {
    if (m.rows() == 0) return true;
    return max_real_eigenvalue(m) < -margin;
}

double care_residual(const Matrix& X, const Matrix& Y, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
    Matrix G = Y * R.llt().solve(Y.transpose());
    return (X.transpose() * P + P * X - P * G * P + Q).norm();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& C) {
    const Index n = A.rows();
    if (A.cols() != n || C.rows() != n || C.cols() != n)
        throw InputError("solve_lyapunov: dimension mismatch");
    Eigen::ComplexSchur<CMatrix> schur(A.cast<Complex>());
    if (schur.info() != Eigen::Success) throw NumericError("lyapunov: Schur failed");
    const CMatrix& T = schur.matrixT();  // upper triangular
    const CMatrix& U = schur.matrixU();
    // A = U T U^H, substitute S = conj(U) Yt U^H:
    //   T^T Yt + Yt T = U^T C U, then forward-substitute column by column.
    CMatrix Ct = U.transpose() * C.cast<Complex>() * U;
    CMatrix Yt = CMatrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
        CVector rhs = Ct.col(k);
        for (Index j = 0; j < k; ++j) rhs -= T(j, k) * Yt.col(j);
        // (T^T + T(k,k) I) is lower triangular
        for (Index i = 0; i < n; ++i) {
            Complex s = rhs(i);
            for (Index j = 0; j < i; ++j) s -= T(j, i) * Yt(j, k);
            Complex d = T(i, i) + T(k, k);
            if (std::abs(d) < 1e-300) throw NumericError("lyapunov: spectrum not sign-split");
            Yt(i, k) = s / d;
        }
    }
    CMatrix S = U.conjugate() * Yt * U.adjoint();
    return S.real();
}

namespace {

// Stable invariant subspace of the Hamiltonian by ordered complex Schur.
// Returns basis [U1; U2] (2m x m).
CMatrix stable_subspace_schur(const Matrix& H, double imag_axis_tol) {
    const Index n2 = H.rows();
    const Index m = n2 / 2;
    Eigen::ComplexSchur<CMatrix> schur(H.cast<Complex>());
    if (schur.info() != Eigen::Success) throw NumericError("care: Schur failed");
    CMatrix T = schur.matrixT();
    CMatrix U = schur.matrixU();

    double scale = H.norm() + 1.0;
    Index nstable = 0;
    for (Index i = 0; i < n2; ++i) {
        if (std::abs(T(i, i).real()) <= imag_axis_tol * scale)
            throw NumericError("care: Hamiltonian eigenvalue on the imaginary axis "
                               "(pair not stabilizable/detectable at this shift)");
        if (T(i, i).real() < 0) ++nstable;
    }
    if (nstable != m) throw NumericError("care: stable subspace has wrong dimension");

    // Bubble stable eigenvalues to the top-left by adjacent swaps. For a
    // 2x2 block [[a, b], [0, d]], the rotation taking (b, d - a) to (r, 0)
    // exchanges the diagonal entries.
    auto swap_adjacent = [&](Index k) {
        Complex a = T(k, k), b = T(k, k + 1), d = T(k + 1, k + 1);
        Complex p = b, q = d - a;
        double nrm = std::sqrt(std::norm(p) + std::norm(q));
        if (nrm < 1e-300) return;  // equal eigenvalues, nothing to do
        Complex c = p / nrm;
        Complex s = q / nrm;
        Eigen::Matrix2cd G;
        G << std::conj(c), std::conj(s), -s, c;
        T.block(k, k, 2, n2 - k) = G * T.block(k, k, 2, n2 - k);
        T.block(0, k, k + 2, 2) = T.block(0, k, k + 2, 2) * G.adjoint();
        U.middleCols(k, 2) = U.middleCols(k, 2) * G.adjoint();
        T(k + 1, k) = 0.0;
    };

    for (Index target = 0; target < m; ++target) {
        // find first stable eigenvalue at or after `target`
        Index src = target;
        while (src < n2 && T(src, src).real() >= 0) ++src;
        if (src == n2) throw NumericError("care: reordering lost a stable eigenvalue");
        for (Index k = src; k > target; --k) swap_adjacent(k - 1);
    }
    return U.leftCols(m);
}

// Stable invariant subspace via the matrix sign function (Byers' scaled
// Newton iteration). Cheaper than Schur for large Hamiltonians: each step
// is one LU inverse in real arithmetic.
CMatrix stable_subspace_sign(const Matrix& H) {
    const Index n2 = H.rows();
    Matrix Z = H;
    const double tol = 1e-13;
    Matrix Zold;
    for (int it = 0; it < 120; ++it) {
        Zold = Z;
        Eigen::PartialPivLU<Matrix> lu(Z);
        double det = std::abs(lu.determinant());
        if (!(det > 0.0) || !std::isfinite(det))
            throw NumericError("care: sign iteration hit a singular iterate "
                               "(eigenvalue on or near the imaginary axis)");
        double c = std::pow(det, -1.0 / static_cast<double>(n2));
        Matrix Zinv = lu.inverse();
        Z = 0.5 * (c * Z + (1.0 / c) * Zinv);
        double rel = (Z - Zold).norm() / std::max(1.0, Z.norm());
        if (rel < tol) break;
        if (it == 119) throw NumericError("care: sign iteration did not converge");
    }
    // Projector onto the stable subspace: (I - sign(H)) / 2, basis by QR.
    Matrix proj = 0.5 * (Matrix::Identity(n2, n2) - Z);
    Eigen::ColPivHouseholderQR<Matrix> qr(proj);
    qr.setThreshold(1e-7);
    Index m = n2 / 2;
    if (qr.rank() != m) throw NumericError("care: stable projector has wrong rank");
    Matrix Qfull = qr.householderQ();
    return Qfull.leftCols(m).cast<Complex>();
}

}  // namespace

Matrix solve_care(const Matrix& X, const Matrix& Y, const Matrix& Q, const Matrix& R,
                  const CareOptions& opt) {
    const Index m = X.rows();
    if (X.cols() != m || Q.rows() != m || Q.cols() != m || Y.rows() != m ||
        R.rows() != Y.cols() || R.cols() != Y.cols())
        throw InputError("solve_care: dimension mismatch");
    if ((Q - Q.transpose()).norm() > 1e-10 * (1.0 + Q.norm()))
        throw InputError("solve_care: Q not symmetric");
    Eigen::LLT<Matrix> rllt(R);
    if (rllt.info() != Eigen::Success) throw InputError("solve_care: R not positive definite");
    if (m == 0) return Matrix(0, 0);

    Matrix G = Y * rllt.solve(Y.transpose());
    Matrix H(2 * m, 2 * m);
    H << X, -G, -Q, -X.transpose();

    CMatrix basis = (m <= opt.schur_size_limit) ? stable_subspace_schur(H, opt.imag_axis_tol)
                                                : stable_subspace_sign(H);
    CMatrix U1 = basis.topRows(m);
    CMatrix U2 = basis.bottomRows(m);
    // P = U2 U1^-1, solved as U1^T P^T = U2^T
    Eigen::PartialPivLU<CMatrix> lu(U1.transpose());
    Matrix P = lu.solve(U2.transpose()).transpose().real();
    P = 0.5 * (P + P.transpose());

    double res = (X.transpose() * P + P * X - P * G * P + Q).norm();
    double bound = opt.residual_tol * (1.0 + P.norm());
    for (int step = 0; step < opt.max_newton_steps && res > bound; ++step) {
        // Newton: solve (X - GP)' D + D (X - GP) = -residual for the update.
        Matrix Acl = X - G * P;
        Matrix Res = X.transpose() * P + P * X - P * G * P + Q;
        Matrix D = solve_lyapunov(Acl, -Res);
        P += D;
        P = 0.5 * (P + P.transpose());
        res = (X.transpose() * P + P * X - P * G * P + Q).norm();
        bound = opt.residual_tol * (1.0 + P.norm());
    }
    if (res > bound) {
        std::ostringstream os;
        os << "care: residual " << res << " exceeds tolerance " << bound;
        throw NumericError(os.str());
    }
    return P;
}

Matrix expm(const Matrix& m) {
    if (m.rows() != m.cols()) throw InputError("expm: matrix not square");
    return m.exp();
}

}  // namespace netobs::linalg
