#pragma once

#include "netobs/common.hpp"
#include "netobs/design.hpp"
#include "netobs/graph.hpp"

#include <cstdint>
#include <filesystem>

namespace netobs::epidemics {

// SIRD metapopulation model. State ordering: S_1..S_N, I_1..I_N, R_1..R_N,
// D_1..D_N (4N states). K(i, j) is the daily traveler flow from group j to
// group i.
struct SirdModel {
    int N = 0;
    Vector beta;   // per-group contact rates (1/day)
    double gamma = 0.16;  // recovery rate (1/day)
    double eta = 0.01;    // fatality fraction
    Matrix K;      // travel matrix (persons/day), zero diagonal, nonneg
    Vector P0;     // group populations (persons)

    int states() const { return 4 * N; }
    void validate() const;

    Index s_index(int i) const { return i; }
    Index i_index(int i) const { return N + i; }
    Index r_index(int i) const { return 2 * N + i; }
    Index d_index(int i) const { return 3 * N + i; }
};

/// Eq.-(8)-style right hand side with P_i = S_i + I_i + R_i + D_i.
Vector sird_rhs(const SirdModel& model, const Vector& state);

/// 4N-node structural graph (P_i treated as a parameter: D nodes have no
/// outgoing influence). Sensor/target sets filled by the caller.
graph::InferenceGraph sird_inference_graph(const SirdModel& model);

/// Linear part of the dynamics around the disease-free reference with
/// populations P0 (the bilinear infection terms are excluded).
Matrix sird_linear_part(const SirdModel& model);

// Routing of the bilinear terms: groups whose S and I are both selected by
// F0 go to f1 (computable from estimates); the rest are treated as unknown
// inputs through W (one column e_I - e_S per unrouted group).
struct NonlinearDecomposition {
    std::vector<int> routed_groups;         // f1 groups
    std::vector<int> unrouted_groups;       // W columns, in order
    std::vector<int> s_row_in_f0;           // per group: F0 row of S_i or -1
    std::vector<int> i_row_in_f0;           // per group: F0 row of I_i or -1
    Matrix W;                               // n x |unrouted|
    double kappa = 0.0;                     // max_i beta_i
};

NonlinearDecomposition decompose_nonlinearity(const SirdModel& model, const NodeSet& f0_nodes);

// Nonlinear functional observer  w' = N w + J y + L f1(y, z_hat),
// z_hat = w + E y  (D = identity).
struct NonlinearObserver {
    design::ObserverRealization linear;  // N, J, E blocks (H unused)
    Matrix L;                            // r0 x n
    NonlinearDecomposition decomp;
    NodeSet sensors;  // group ids (D nodes measured)
    NodeSet targets;  // group ids (I nodes estimated)
    NodeSet f0_nodes; // state-node indices

    Vector f1(const Vector& zhat, const SirdModel& model) const;
};

/// SI-style nonlinear functional observer: F0 from the structural
/// algorithm, unknown-input blocks extended by W, gains by LQR pole
/// placement (the LMI feasibility step is replaced by the placement plus
/// an empirical convergence check).
NonlinearObserver design_nonlinear_functional_observer(const SirdModel& model,
                                                       const NodeSet& sensor_groups,
                                                       const NodeSet& target_groups, double alpha);

/// Integrate observer estimates against a measured death-count trace
/// (uniform grid). Returns per-step estimates of the F0 nodes.
Matrix run_nonlinear_observer(const NonlinearObserver& obs, const SirdModel& model,
                              const std::vector<double>& times, const Matrix& y_trace,
                              const Vector& w0);

struct Outbreak {
    int group = 0;
    double size = 1000.0;
};

struct PeakPredictionConfig {
    Outbreak true_outbreak;
    int n_trials = 100;
    std::uint64_t seed = 1;
    double dt = 0.02;        // days
    double horizon = 250.0;  // days
    double output_step = 0.1;
    double alpha = -2.0;     // observer poles (1/day)
    double false_size = 1.0;
};

struct PeakPredictionReport {
    NodeSet target_groups;
    std::vector<double> true_peak_times;                  // per target
    std::vector<std::vector<double>> freerun_errors;      // per target, per trial
    std::vector<std::vector<double>> observer_errors;     // per target, per trial
    std::vector<int> no_peak_flags;                       // targets without a peak
};

/// Fig.-6 pipeline: reference outbreak, then trials initialized with a
/// false outbreak guess; peak-time errors for free-run predictions vs the
/// functional-observer estimates.
PeakPredictionReport peak_prediction_experiment(const SirdModel& model, const NodeSet& sensors,
                                                const NodeSet& targets,
                                                const PeakPredictionConfig& cfg);

/// Scenario JSON: {"beta":[...],"gamma":..,"eta":..,"K":[[i,j,v],...],
/// "P0":[...],"sensors":[...],"targets":[...],"outbreak":{"group":..,"size":..}}.
struct Scenario {
    SirdModel model;
    NodeSet sensors, targets;
    Outbreak outbreak;
};
Scenario load_scenario_json(const std::filesystem::path& path);
void save_scenario_json(const Scenario& sc, const std::filesystem::path& path);

/// Synthetic gravity-model air network scenario (seeded, deterministic).
Scenario synthetic_scenario(int n_groups = 30, std::uint64_t seed = 11);

}  // namespace netobs::epidemics
