#pragma once

#include "netobs/common.hpp"
#include "netobs/graph.hpp"
#include "netobs/obsv.hpp"

#include <cstdint>
#include <filesystem>

namespace netobs::powergrid {

// Structure-preserving grid: generators are second-order Kuramoto
// oscillators (swing equation), loads and generator terminals first-order.
// Oscillator order: generators 0..n_g-1, then terminals/loads. State:
// (phi_1..phi_N, phidot_1..phidot_{n_g}), dimension n = N + n_g.
struct GridModel {
    int n_g = 0;  // generators
    int n_l = 0;  // loads (terminals are implicit: one per generator)
    Matrix K;     // N x N coupling, symmetric, zero diagonal (per-unit power)
    Vector P;     // injections (per-unit power)
    Vector H;     // inertias, generators only meaningful (seconds)
    Vector D;     // dampings (per-unit)
    double omega_R = 2.0 * 3.14159265358979323846 * 60.0;  // rad/s

    int oscillators() const { return 2 * n_g + n_l; }
    int state_dim() const { return oscillators() + n_g; }
    void validate() const;
};

/// Right hand side of the swing/phase-oscillator equations.
Vector swing_rhs(const GridModel& grid, const Vector& state);

/// Newton-Raphson on the phase fixed point with one phase pinned to 0;
/// injections are projected to zero sum first. Residual <= 1e-10 or throws.
Vector solve_equilibrium(const GridModel& grid, const Vector& initial_guess);

/// Analytic Jacobian at the equilibrium, state ordering (phases, generator
/// frequencies).
Matrix linearize(const GridModel& grid, const Vector& equilibrium);

/// Structural pattern of the linearization as an inference graph (sensors
/// and targets filled by the caller).
graph::InferenceGraph grid_inference_graph(const GridModel& grid);

struct DetectionSample {
    double t_d = 0.0;
    int observer_id = 0;
    bool attacked = false;
    double rmse = 0.0;
};

struct DetectionReport {
    std::vector<DetectionSample> samples;
    std::vector<double> t_d_grid;
    // separation statistic per t_d: median(attacked) - p95(clean)
    std::vector<double> separation;
    int attacked_bus = -1;
};

enum class AttackKind { none, neighbor_copy, constant_offset };

struct AttackExperimentConfig {
    NodeSet pmu_buses;          // oscillator indices (loads/terminals)
    int attacked_bus = -1;      // must be in pmu_buses
    int ensemble_size = 100;
    int subset_size = 0;        // default |S| / 2
    std::vector<double> t_d_grid{0.25, 0.5, 1.0};
    std::uint64_t seed = 1;
    AttackKind attack = AttackKind::neighbor_copy;
    double offset = 0.1;        // for constant_offset
    double perturb_sigma = 0.01;  // Gaussian phase kick at t = 1 s
    double alpha = -20.0;       // observer pole parameter (1/s)
    double dt = 1e-3;
    int max_subset_retries = 50;
};

/// Fig.-5 pipeline: nonlinear plant simulation with a phase perturbation at
/// t = 1 s, an ensemble of functional observers for the attacked bus's
/// phase designed from random PMU subsets (excluding the attacked PMU), and
/// RMSE cross-validation of the transmitted stream against each estimate
/// for clean and attacked streams.
DetectionReport run_attack_experiment(const GridModel& grid, const AttackExperimentConfig& cfg);

/// Grid JSON: {"n_g","n_l","K":[[i,j,v],...],"P":[...],"H":[...],"D":[...],
/// "omega_R":...}.
GridModel load_grid_json(const std::filesystem::path& path);
void save_grid_json(const GridModel& grid, const std::filesystem::path& path);

/// Deterministic synthetic test grid: ring of loads/terminals with
/// generator spurs, balanced injections (30 buses at the defaults).
GridModel synthetic_grid(int n_g = 10, int n_l = 10, std::uint64_t seed = 7);

}  // namespace netobs::powergrid
