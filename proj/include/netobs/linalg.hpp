#pragma once

#include "netobs/common.hpp"

#include <optional>

namespace netobs::linalg {

/// Tolerance for rank decisions: max(rows,cols) * sigma_max * eps * 64.
/// The 64x safety factor suits generic-rank checks on random realizations
/// with entries bounded away from zero; callers may override.
double auto_rank_tol(const Matrix& m, double sigma_max);

/// Number of singular values strictly greater than tol (auto rule when
/// tol is not given). Throws NumericError if the SVD does not converge.
int numeric_rank(const Matrix& m, std::optional<double> tol = std::nullopt);
int numeric_rank(const CMatrix& m, std::optional<double> tol = std::nullopt);

/// Moore-Penrose inverse via SVD with the numeric_rank tolerance.
Matrix pseudoinverse(const Matrix& m, std::optional<double> tol = std::nullopt);

/// Columns form an orthonormal basis of {v : Mv = 0}; width = cols - rank.
Matrix kernel_basis(const Matrix& m, std::optional<double> tol = std::nullopt);

/// All n eigenvalues with multiplicity, unordered.
CVector eigenvalues(const Matrix& m);

/// true iff max real part of spec(M) < -margin.
bool is_hurwitz(const Matrix& m, double margin = 0.0);

double max_real_eigenvalue(const Matrix& m);

struct CareOptions {
    double residual_tol = 1e-8;     // relative to 1 + ||P||_F
    int max_newton_steps = 2;       // refinement when the direct solve is short
    int schur_size_limit = 200;     // above this, the matrix-sign path is used
    double imag_axis_tol = 1e-9;    // Hamiltonian eigenvalue split guard
};

/// Stabilizing solution P of  X'P + PX - P Y R^-1 Y' P + Q = 0.
///
/// Invariant-subspace method on the 2m x 2m Hamiltonian: ordered complex
/// Schur for moderate sizes, matrix sign iteration (Byers scaling) for
/// large ones, then Newton refinement if the residual exceeds tolerance.
/// Throws NumericError when no stabilizing solution exists (eigenvalues on
/// the imaginary axis) or the residual cannot be met.
Matrix solve_care(const Matrix& X, const Matrix& Y, const Matrix& Q, const Matrix& R,
                  const CareOptions& opt = {});

/// Frobenius norm of the CARE residual at P.
double care_residual(const Matrix& X, const Matrix& Y, const Matrix& Q, const Matrix& R,
                     const Matrix& P);

/// Solve A' S + S A = C for S (A need not be symmetric; spec(A) and
/// -spec(A) must be disjoint). Complex Bartels-Stewart.
Matrix solve_lyapunov(const Matrix& A, const Matrix& C);

/// e^M by scaling-and-squaring (Pade).
Matrix expm(const Matrix& m);

}  // namespace netobs::linalg
