#pragma once

#include "netobs/common.hpp"
#include "netobs/graph.hpp"
#include "netobs/obsv.hpp"

#include <optional>
#include <string>

namespace netobs::design {

struct PolePlacementDefaults {
    double alpha = -100.0;
    double q_scale = 1e-3;
    double r_scale = 1.0;
};

// Observer matrices for  w' = N w + J y + H u,  z_hat = D w + E y.
// For kind == functional the first r rows of f0_nodes are the targets and
// z_hat tracks F0 x; for kind == luenberger z_hat tracks the unmeasured
// coordinates (reassemble with the plant's C, F).
struct ObserverRealization {
    std::string kind;  // "functional" | "luenberger"
    int r0 = 0;
    double alpha = 0.0;
    NodeSet f0_nodes;  // empty for luenberger
    Matrix N, J, H, D, E;

    // diagnostic extras (not serialized): w tracks T xbar with xbar = P^-1 x
    Matrix T1, T2, Pinv;

    /// Consistent observer state for a given plant state (zero initial
    /// error): w = [T1 T2] P^-1 x.
    Vector consistent_state(const Vector& x) const;
};

/// Minimum-order F0 pattern for the triple encoded by g: starts from the
/// targets and appends the lowest-index influencer of an F0 node that is
/// not yet covered by every maximum matching of [C; CA; F0], until none
/// remain. Returns target nodes first, then auxiliary nodes in the order
/// added. Throws InfeasibleError when g is not structurally functionally
/// observable; warns (via the optional sink) when a target lacks a
/// self-link.
NodeSet minimal_f0(const graph::InferenceGraph& g, std::string* warning = nullptr);

/// LQR pole placement: returns G such that the right-most eigenvalue of
/// X' - G Y' is at most alpha (+ small tolerance). Solves the CARE on the
/// pair (X - alpha I, Y) with Q = q_scale I, R = r_scale I and returns
/// G = (R^-1 Y' P)'.
Matrix place_poles_lqr(const Matrix& X, const Matrix& Y, double alpha, double q_scale,
                       double r_scale);

/// Darouach functional observer for the given F0 selection. The pair
/// (A, C, F0) must pass check_darouach at nonnegative_real_part scope.
ObserverRealization design_functional_observer(const obsv::NumericSystem& sys,
                                               const NodeSet& f0_nodes, double alpha = -100.0,
                                               double q_scale = 1e-3, double r_scale = 1.0);

/// Reduced-order (n - q) observer of the unmeasured coordinates; (A, C)
/// must be observable.
ObserverRealization design_luenberger(const obsv::NumericSystem& sys, double alpha = -100.0,
                                      double q_scale = 1e-3, double r_scale = 1.0);

/// Target estimate from the observer output: first r components for a
/// functional observer, F (C^+ y + C_perp z_hat) for a Luenberger one.
Matrix target_readout_D(const obsv::NumericSystem& sys, const ObserverRealization& obs);
Matrix target_readout_E(const obsv::NumericSystem& sys, const ObserverRealization& obs);

/// JSON serialization (normative layout: kind, r0, alpha, F0_nodes, and
/// N/J/H/D/E as row-major arrays with dims).
std::string to_json(const ObserverRealization& obs);
ObserverRealization observer_from_json(const std::string& text);

}  // namespace netobs::design
