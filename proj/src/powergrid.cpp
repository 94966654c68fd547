#include "netobs/powergrid.hpp"

#include "netobs/design.hpp"
#include "netobs/linalg.hpp"
#include "netobs/rng.hpp"
#include "netobs/sim.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace netobs::powergrid {

using nlohmann::json;

void GridModel::validate() const {
    const int N = oscillators();
    if (n_g < 0 || n_l < 0 || N <= 0) throw InputError("grid: bad counts");
    if (K.rows() != N || K.cols() != N) throw InputError("grid: K must be N x N");
    if ((K - K.transpose()).norm() > 1e-12 * (1.0 + K.norm()))
        throw InputError("grid: K must be symmetric");
    for (int i = 0; i < N; ++i) {
        if (K(i, i) != 0.0) throw InputError("grid: K diagonal must be zero");
        for (int j = 0; j < N; ++j)
            if (K(i, j) < 0.0) throw InputError("grid: K must be nonnegative");
    }
    if (P.size() != N) throw InputError("grid: P size");
    if (H.size() != N || D.size() != N) throw InputError("grid: H/D size");
    for (int i = 0; i < n_g; ++i)
        if (H(i) <= 0.0) throw InputError("grid: generator inertia must be positive");
    for (int i = 0; i < N; ++i)
        if (D(i) <= 0.0) throw InputError("grid: damping must be positive");
    if (!(omega_R > 0.0)) throw InputError("grid: omega_R must be positive");
}

Vector swing_rhs(const GridModel& grid, const Vector& state) {
    const int N = grid.oscillators();
    if (state.size() != grid.state_dim()) throw InputError("swing_rhs: state size");
    Vector deriv(grid.state_dim());
    auto coupling = [&](int i) {
        double s = 0.0;
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0)
                s += grid.K(i, j) * std::sin(state(j) - state(i));
        return s;
    };
    // generators: phi_i' = phidot_i; (2H/wR) phiddot = P - (D/wR) phidot + coupling
    for (int i = 0; i < grid.n_g; ++i) {
        double w = state(N + i);
        deriv(i) = w;
        deriv(N + i) =
            (grid.omega_R / (2.0 * grid.H(i))) * (grid.P(i) + coupling(i)) -
            (grid.D(i) / (2.0 * grid.H(i))) * w;
    }
    // terminals and loads: (D/wR) phi' = P + coupling
    for (int i = grid.n_g; i < N; ++i)
        deriv(i) = (grid.omega_R / grid.D(i)) * (grid.P(i) + coupling(i));
    if (kernels::has_nonfinite(deriv.data(), static_cast<std::size_t>(deriv.size())))
        throw NumericError("swing_rhs: non-finite derivative");
    return deriv;
}

Vector solve_equilibrium(const GridModel& grid, const Vector& initial_guess) {
    grid.validate();
    const int N = grid.oscillators();
    Vector phi = initial_guess.size() >= N ? Vector(initial_guess.head(N)) : Vector(Vector::Zero(N));

    // balanced injections: project out the mean
    Vector P = grid.P;
    double mean = P.sum() / static_cast<double>(N);
    P.array() -= mean;

    auto mismatch = [&](const Vector& ph) {
        Vector g(N);
        for (int i = 0; i < N; ++i) {
            double s = P(i);
            for (int j = 0; j < N; ++j)
                if (j != i && grid.K(i, j) != 0.0) s += grid.K(i, j) * std::sin(ph(j) - ph(i));
            g(i) = s;
        }
        return g;
    };

    const int ref = N - 1;  // grounded phase
    for (int it = 0; it < 100; ++it) {
        Vector g = mismatch(phi);
        if (g.norm() <= 1e-12) break;

        Matrix J = Matrix::Zero(N - 1, N - 1);
        auto red = [&](int i) { return i < ref ? i : i - 1; };
        for (int i = 0; i < N; ++i) {
            if (i == ref) continue;
            double diag = 0.0;
            for (int j = 0; j < N; ++j) {
                if (j == i || grid.K(i, j) == 0.0) continue;
                double c = grid.K(i, j) * std::cos(phi(j) - phi(i));
                diag -= c;
                if (j != ref) J(red(i), red(j)) = c;
            }
            J(red(i), red(i)) += diag;
        }
        Vector gi(N - 1);
        for (int i = 0, k = 0; i < N; ++i)
            if (i != ref) gi(k++) = g(i);
        Vector step = J.partialPivLu().solve(-gi);
        if (!step.allFinite()) throw NumericError("solve_equilibrium: singular Newton step");
        // damped update keeps large first steps from overshooting the basin
        double scale = std::min(1.0, 1.0 / std::max(1.0, step.cwiseAbs().maxCoeff()));
        for (int i = 0, k = 0; i < N; ++i)
            if (i != ref) phi(i) += scale * step(k++);
        phi(ref) = 0.0;
    }
    Vector g = mismatch(phi);
    if (g.norm() > 1e-10)
        throw NumericError("solve_equilibrium: Newton did not converge (residual " +
                           std::to_string(g.norm()) + "); loading may be infeasible");

    Vector eq = Vector::Zero(grid.state_dim());
    eq.head(N) = phi;
    return eq;
}

Matrix linearize(const GridModel& grid, const Vector& equilibrium) {
    grid.validate();
    const int N = grid.oscillators();
    const int n = grid.state_dim();
    if (equilibrium.size() != n) throw InputError("linearize: state size");
    Matrix A = Matrix::Zero(n, n);
    auto cos_sum = [&](int i) {
        double s = 0.0;
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0)
                s += grid.K(i, j) * std::cos(equilibrium(j) - equilibrium(i));
        return s;
    };
    for (int i = 0; i < grid.n_g; ++i) {
        A(i, N + i) = 1.0;
        double a = grid.omega_R / (2.0 * grid.H(i));
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0)
                A(N + i, j) = a * grid.K(i, j) * std::cos(equilibrium(j) - equilibrium(i));
        A(N + i, i) = -a * cos_sum(i);
        A(N + i, N + i) = -grid.D(i) / (2.0 * grid.H(i));
    }
    for (int i = grid.n_g; i < N; ++i) {
        double a = grid.omega_R / grid.D(i);
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0)
                A(i, j) = a * grid.K(i, j) * std::cos(equilibrium(j) - equilibrium(i));
        A(i, i) = -a * cos_sum(i);
    }
    return A;
}

graph::InferenceGraph grid_inference_graph(const GridModel& grid) {
    const int N = grid.oscillators();
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < grid.n_g; ++i) {
        edges.emplace_back(N + i, i);      // frequency drives phase
        edges.emplace_back(N + i, N + i);  // damping self-link
        edges.emplace_back(i, N + i);      // phase enters the swing equation
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0) edges.emplace_back(j, N + i);
    }
    for (int i = grid.n_g; i < N; ++i) {
        edges.emplace_back(i, i);
        for (int j = 0; j < N; ++j)
            if (j != i && grid.K(i, j) != 0.0) edges.emplace_back(j, i);
    }
    return graph::InferenceGraph(grid.state_dim(), edges, {}, {});
}

namespace {
double percentile(std::vector<double> v, double pct) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double idx = pct / 100.0 * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}
}  // namespace

DetectionReport run_attack_experiment(const GridModel& grid, const AttackExperimentConfig& cfg) {
    grid.validate();
    const int N = grid.oscillators();
    const int n = grid.state_dim();
    if (cfg.pmu_buses.empty()) throw InputError("attack experiment: no PMU buses");
    for (int b : cfg.pmu_buses)
        if (b < grid.n_g || b >= N)
            throw InputError("attack experiment: PMUs belong on load/terminal buses");
    if (std::find(cfg.pmu_buses.begin(), cfg.pmu_buses.end(), cfg.attacked_bus) ==
        cfg.pmu_buses.end())
        throw InputError("attack experiment: attacked bus must carry a PMU");

    const int subset_size = cfg.subset_size > 0
                                ? cfg.subset_size
                                : std::max(1, static_cast<int>(cfg.pmu_buses.size()) / 2);
    NodeSet pool;  // PMUs availabe to the observers
    for (int b : cfg.pmu_buses)
        if (b != cfg.attacked_bus) pool.push_back(b);
    if (static_cast<int>(pool.size()) < subset_size)
        throw InputError("attack experiment: subset size exceeds the non-attacked PMU pool");

    // equilibrium, linearization, nonlinear simulation with the phase kick
    Vector eq = solve_equilibrium(grid, Vector::Zero(n));
    Matrix A = linearize(grid, eq);
    graph::InferenceGraph g0 = grid_inference_graph(grid);

    double t_max = 1.0 + *std::max_element(cfg.t_d_grid.begin(), cfg.t_d_grid.end());
    Pcg32 kick_rng = substream(cfg.seed, "powergrid.kick");
    Vector x0 = eq;
    for (int i = 0; i < grid.n_g; ++i) x0(i) += kick_rng.normal(0.0, cfg.perturb_sigma);

    auto rhs = [&](double, const Vector& x, Vector& dx) { dx = swing_rhs(grid, x); };
    sim::SimTrace plant = sim::rk4_integrate(rhs, x0, 1.0, t_max, cfg.dt);
    const std::size_t steps = plant.steps();

    // measured deviations for every oscillator phase
    Matrix dev(steps, N);
    for (std::size_t s = 0; s < steps; ++s)
        dev.row(static_cast<Index>(s)) =
            (plant.states.row(static_cast<Index>(s)).head(N) - eq.head(N).transpose());

    // transmitted streams for the attacked PMU
    Matrix clean_stream = dev.col(cfg.attacked_bus);
    Matrix attacked_stream = clean_stream;
    if (cfg.attack == AttackKind::neighbor_copy) {
        int neighbor = -1;
        for (int j = 0; j < N; ++j)
            if (j != cfg.attacked_bus && grid.K(cfg.attacked_bus, j) > 0.0) {
                neighbor = j;
                break;
            }
        if (neighbor < 0) throw InfeasibleError("attack experiment: attacked bus has no neighbor");
        // false data copies the neighbor's absolute phase
        attacked_stream = dev.col(neighbor).array() + (eq(neighbor) - eq(cfg.attacked_bus));
    } else if (cfg.attack == AttackKind::constant_offset) {
        attacked_stream = clean_stream.array() + cfg.offset;
    }

    DetectionReport report;
    report.t_d_grid = cfg.t_d_grid;
    report.attacked_bus = cfg.attacked_bus;

    Pcg32 subset_rng = substream(cfg.seed, "powergrid.subsets");
    Matrix F = obsv::selection_matrix({cfg.attacked_bus}, n);
    std::vector<std::pair<int, int>> edges;
    for (int j = 0; j < n; ++j)
        for (int i2 : g0.out_neighbors(j)) edges.emplace_back(j, i2);

    for (int ell = 0; ell < cfg.ensemble_size; ++ell) {
        bool designed = false;
        for (int attempt = 0; attempt < cfg.max_subset_retries && !designed; ++attempt) {
            // sample a PMU subset from the pool without replacement
            NodeSet shuffled = pool;
            for (std::size_t i = shuffled.size(); i > 1; --i)
                std::swap(shuffled[i - 1],
                          shuffled[subset_rng.next_below(static_cast<std::uint32_t>(i))]);
            NodeSet subset(shuffled.begin(), shuffled.begin() + subset_size);
            std::sort(subset.begin(), subset.end());
            try {
                graph::InferenceGraph g(n, edges, subset, {cfg.attacked_bus});
                NodeSet f0 = design::minimal_f0(g);
                obsv::NumericSystem sys;
                sys.A = A;
                sys.B = Matrix::Zero(n, 1);
                sys.C = obsv::selection_matrix(subset, n);
                sys.F = F;
                design::ObserverRealization obs =
                    design::design_functional_observer(sys, f0, cfg.alpha, 1e-3, 1.0);
                designed = true;

                // observer driven by the measured deviations, w(1 s)
                // consistent with the pre-kick equilibrium (zero deviation)
                Matrix y(steps, subset.size());
                for (std::size_t si = 0; si < subset.size(); ++si)
                    y.col(static_cast<Index>(si)) = dev.col(subset[si]);
                Vector w = Vector::Zero(obs.N.rows());
                Matrix est(steps, 1);
                est(0, 0) = clean_stream(0, 0);  // clamped pre-attack value
                for (std::size_t s = 0; s + 1 < steps; ++s) {
                    // RK4 on w' = N w + J y(t), y linearly interpolated
                    Vector y0 = y.row(static_cast<Index>(s)).transpose();
                    Vector y1 = y.row(static_cast<Index>(s + 1)).transpose();
                    Vector ymid = 0.5 * (y0 + y1);
                    double h = plant.times[s + 1] - plant.times[s];
                    Vector k1 = obs.N * w + obs.J * y0;
                    Vector k2 = obs.N * (w + 0.5 * h * k1) + obs.J * ymid;
                    Vector k3 = obs.N * (w + 0.5 * h * k2) + obs.J * ymid;
                    Vector k4 = obs.N * (w + h * k3) + obs.J * y1;
                    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    est(static_cast<Index>(s + 1), 0) = w(0) + obs.E.row(0).dot(y1);
                }

                for (double td : cfg.t_d_grid) {
                    double rc = sim::rmse_window(plant.times, clean_stream, est, 1.0, td);
                    double ra = sim::rmse_window(plant.times, attacked_stream, est, 1.0, td);
                    report.samples.push_back({td, ell, false, rc});
                    report.samples.push_back({td, ell, true, ra});
                }
            } catch (const InfeasibleError&) {
                designed = false;
            } catch (const NumericError&) {
                designed = false;
            }
        }
        if (!designed)
            throw InfeasibleError("attack experiment: no feasible PMU subset after retries for "
                                  "observer " +
                                  std::to_string(ell));
    }

    for (double td : cfg.t_d_grid) {
        std::vector<double> clean, attacked;
        for (const auto& s : report.samples) {
            if (s.t_d != td) continue;
            (s.attacked ? attacked : clean).push_back(s.rmse);
        }
        report.separation.push_back(percentile(attacked, 50.0) - percentile(clean, 95.0));
    }
    return report;
}

GridModel load_grid_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("load_grid_json: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(std::string("load_grid_json: parse error: ") + e.what());
    }
    GridModel g;
    g.n_g = j.at("n_g").get<int>();
    g.n_l = j.at("n_l").get<int>();
    const int N = g.oscillators();
    g.K = Matrix::Zero(N, N);
    for (const auto& t : j.at("K")) {
        int a = t.at(0).get<int>(), b = t.at(1).get<int>();
        double v = t.at(2).get<double>();
        if (a < 0 || a >= N || b < 0 || b >= N) throw InputError("load_grid_json: K index");
        g.K(a, b) = v;
        g.K(b, a) = v;
    }
    auto vec = [&](const char* key) {
        auto v = j.at(key).get<std::vector<double>>();
        if (static_cast<int>(v.size()) != N)
            throw InputError(std::string("load_grid_json: ") + key + " size");
        return Eigen::Map<Vector>(v.data(), N).eval();
    };
    g.P = vec("P");
    g.H = vec("H");
    g.D = vec("D");
    if (j.contains("omega_R")) g.omega_R = j.at("omega_R").get<double>();
    g.validate();
    return g;
}

void save_grid_json(const GridModel& grid, const std::filesystem::path& path) {
    json K = json::array();
    for (int i = 0; i < grid.oscillators(); ++i)
        for (int jj = i + 1; jj < grid.oscillators(); ++jj)
            if (grid.K(i, jj) != 0.0) K.push_back({i, jj, grid.K(i, jj)});
    auto vec = [](const Vector& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    json j{{"n_g", grid.n_g},   {"n_l", grid.n_l}, {"K", K},
           {"P", vec(grid.P)},  {"H", vec(grid.H)}, {"D", vec(grid.D)},
           {"omega_R", grid.omega_R}};
    std::ofstream out(path);
    if (!out) throw InputError("save_grid_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

GridModel synthetic_grid(int n_g, int n_l, std::uint64_t seed) {
    GridModel g;
    g.n_g = n_g;
    g.n_l = n_l;
    const int N = g.oscillators();
    g.K = Matrix::Zero(N, N);
    Pcg32 rng = substream(seed, "powergrid.synthetic");
    auto link = [&](int a, int b, double lo, double hi) {
        double v = rng.uniform(lo, hi);
        g.K(a, b) = v;
        g.K(b, a) = v;
    };
    // generator i hangs off terminal n_g + i; terminals and loads form a ring
    for (int i = 0; i < n_g; ++i) link(i, n_g + i, 1.0, 1.6);
    const int ring = n_g + n_l;  // terminals + loads
    for (int k = 0; k < ring; ++k) link(n_g + k, n_g + (k + 1) % ring, 0.6, 1.2);
    // a few chords for meshing
    for (int k = 0; k < ring / 3; ++k) {
        int a = n_g + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(ring)));
        int b = n_g + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(ring)));
        if (a != b && g.K(a, b) == 0.0) link(a, b, 0.4, 0.8);
    }
    g.P = Vector::Zero(N);
    double gen_total = 0.0;
    for (int i = 0; i < n_g; ++i) {
        g.P(i) = rng.uniform(0.25, 0.45);
        gen_total += g.P(i);
    }
    for (int i = 0; i < n_l; ++i) g.P(n_g + n_g + i) = -gen_total / n_l;
    g.H = Vector::Constant(N, 1.0);
    for (int i = 0; i < n_g; ++i) g.H(i) = rng.uniform(2.0, 5.0);
    g.D = Vector::Constant(N, 0.0);
    for (int i = 0; i < N; ++i) g.D(i) = rng.uniform(1.2, 1.8);
    g.validate();
    return g;
}

}  // namespace netobs::powergrid
