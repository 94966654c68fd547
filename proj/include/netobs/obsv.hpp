#pragma once

#include "netobs/common.hpp"
#include "netobs/graph.hpp"

#include <optional>

namespace netobs::obsv {

// Dense real matrices realizing a structure. Each row of C and F selects a
// single state coordinate (one nonzero entry per row).
struct NumericSystem {
    Matrix A;  // n x n
    Matrix B;  // n x p; defaults to the all-ones column
    Matrix C;  // q x n
    Matrix F;  // r x n

    Index n() const { return A.rows(); }
    Index q() const { return C.rows(); }
    Index r() const { return F.rows(); }

    void validate() const;
};

/// Selection matrix with `values[k]` at (k, nodes[k]); values default to 1.
Matrix selection_matrix(const NodeSet& nodes, Index n, const std::vector<double>& values = {});

/// Node index of the single nonzero in each row; throws if a row is not a
/// single-nonzero selection.
NodeSet selection_nodes(const Matrix& m);

inline constexpr int kDefaultDenseCap = 50;

/// Stacked [C; CA; ...; CA^(n-1)]. Throws InputError above the dense cap,
/// directing callers to the structural/PBH paths.
Matrix observability_matrix(const Matrix& A, const Matrix& C, int cap = kDefaultDenseCap);

/// rank[O; F] == rank(O). Rows of the stacked matrices are normalized to
/// unit length before the rank decision (row scaling preserves row spaces
/// and tames the growth of ||C A^k||).
bool is_functionally_observable_numeric(const NumericSystem& sys,
                                        std::optional<double> tol = std::nullopt,
                                        int cap = kDefaultDenseCap);

/// PBH form: rank[A - tI; C; F] == rank[A - tI; C] at every eigenvalue t.
bool pbh_functional_check(const NumericSystem& sys, std::optional<double> tol = std::nullopt,
                          int cap = kDefaultDenseCap);

enum class EigenvalueScope { all, nonnegative_real_part };

struct DarouachReport {
    bool cond4 = false;
    bool cond5 = false;
    std::vector<Complex> failing_eigenvalues;  // where cond5 breaks
    bool ok() const { return cond4 && cond5; }
};

/// Darouach's two design conditions for (A, C, F0). cond5 is evaluated over
/// the selected eigenvalue scope (design needs Re >= 0 only; `all` matches
/// the paper's statement and is useful for diagnostics).
DarouachReport check_darouach(const Matrix& A, const Matrix& C, const Matrix& F0,
                              std::optional<double> tol = std::nullopt,
                              EigenvalueScope scope = EigenvalueScope::nonnegative_real_part);

/// Graph-theoretic test: every target reaches a sensor, and no target sits
/// in a minimal dilation set.
bool is_structurally_functionally_observable(const graph::InferenceGraph& g);

/// Targets with no influence path to any sensor (condition-1 diagnostics).
std::vector<int> uncovered_targets(const graph::InferenceGraph& g);

/// Lin's structural observability: the special case T = X.
bool is_structurally_observable(const graph::InferenceGraph& g);

/// Reconstruct z(0) = F x(0) from a sampled output trace on [0, t1] using
/// the finite-horizon observability Gramian (Simpson quadrature, u = 0).
/// Throws NumericError when row(F) is not in the Gramian's row space.
Vector gramian_target_reconstruction(const NumericSystem& sys, const Matrix& y_trace, double t1);

struct TargetContrastReport {
    int rank_OFt = 0;            // rank of O F'
    bool functional_obsv = false;  // Eq-(3) style verdict
};

/// rank(O F') together with the functional-observability verdict; the two
/// are not equivalent (the dual of target controllability is weaker).
TargetContrastReport target_controllability_contrast(const NumericSystem& sys,
                                                     int cap = kDefaultDenseCap);

}  // namespace netobs::obsv
