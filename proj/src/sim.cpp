#include "netobs/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace netobs::sim {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t step_count(double t0, double tf, double dt) {
    if (!(dt > 0.0)) throw InputError("rk4: dt must be positive");
    if (tf < t0) throw InputError("rk4: tf < t0");
    return static_cast<std::size_t>(std::ceil((tf - t0) / dt - 1e-12));
}

}  // namespace

SimTrace rk4_integrate(const Rhs& rhs, const Vector& x0, double t0, double tf, double dt) {
    const std::size_t nsteps = step_count(t0, tf, dt);
    const Index n = x0.size();
    SimTrace trace;
    trace.times.resize(nsteps + 1);
    trace.states.resize(nsteps + 1, n);

    Vector x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = t0;
    trace.times[0] = t;
    trace.states.row(0) = x.transpose();
    for (std::size_t s = 0; s < nsteps; ++s) {
        double h = std::min(dt, tf - t);
        rhs(t, x, k1);
        tmp = x + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = x + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = x + h * k3;
        rhs(t + h, tmp, k4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (s + 1 == nsteps) ? tf : t + h;
        if (kernels::has_nonfinite(x.data(), static_cast<std::size_t>(x.size()))) {
            std::ostringstream os;
            os << "rk4: state diverged (non-finite) at step " << s + 1 << ", t = " << t;
            throw NumericError(os.str());
        }
        trace.times[s + 1] = t;
        trace.states.row(s + 1) = x.transpose();
    }
    return trace;
}

InputSignal step_input(double value, Index dim) {
    return [value, dim](double) { return Vector::Constant(dim, value); };
}

InputSignal zero_input(Index dim) {
    return [dim](double) { return Vector::Zero(dim); };
}

SimTrace cosimulate(const obsv::NumericSystem& plant, const design::ObserverRealization& obs,
                    const InputSignal& u, const Vector& x0, const Vector& w0, double dt,
                    double tf) {
    const Index n = plant.n();
    const Index q = plant.q();
    const Index r = plant.r();
    const Index r0 = obs.N.rows();
    if (x0.size() != n || w0.size() != r0) throw InputError("cosimulate: state size mismatch");
    if (obs.J.cols() != q) throw InputError("cosimulate: observer/plant q mismatch");
    Matrix B = plant.B.size() ? plant.B : Matrix::Ones(n, 1);
    if (obs.H.cols() != B.cols()) throw InputError("cosimulate: input width mismatch");

    // Plant A in CSR (network matrices are sparse); observer blocks dense
    // row-major so the dispatched kernels can run the inner loops.
    std::vector<std::tuple<int, int, double>> trip;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (plant.A(i, j) != 0.0)
                trip.emplace_back(static_cast<int>(i), static_cast<int>(j), plant.A(i, j));
    kernels::CsrMatrix Acsr =
        kernels::csr_from_triplets(static_cast<std::size_t>(n), static_cast<std::size_t>(n), trip);

    NodeSet c_nodes = obsv::selection_nodes(plant.C);
    std::vector<double> c_vals(c_nodes.size());
    for (std::size_t k = 0; k < c_nodes.size(); ++k)
        c_vals[k] = plant.C(static_cast<Index>(k), c_nodes[k]);
    NodeSet f_nodes = obsv::selection_nodes(plant.F);
    std::vector<double> f_vals(f_nodes.size());
    for (std::size_t k = 0; k < f_nodes.size(); ++k)
        f_vals[k] = plant.F(static_cast<Index>(k), f_nodes[k]);

    RowMajor Dt = design::target_readout_D(plant, obs);  // r x r0
    Matrix Et = design::target_readout_E(plant, obs);    // r x q
    RowMajor N_rm = obs.N, J_rm = obs.J, B_rm = B, H_rm = obs.H;

    const auto& ops = kernels::active_ops();
    const std::size_t nsteps = step_count(0.0, tf, dt);

    SimTrace trace;
    trace.times.resize(nsteps + 1);
    trace.states.resize(nsteps + 1, n + r0);
    trace.estimates.resize(nsteps + 1, r);
    trace.error_norms.resize(nsteps + 1);

    Vector state(n + r0);
    state << x0, w0;
    Vector y(q), zhat(r), ztrue(r), uin, ytmp(q);

    auto outputs = [&](std::size_t row) {
        const double* xs = state.data();
        const double* ws = state.data() + n;
        for (Index k = 0; k < q; ++k)
            y(k) = c_vals[static_cast<std::size_t>(k)] * xs[c_nodes[static_cast<std::size_t>(k)]];
        ops.gemv_row(Dt.data(), static_cast<std::size_t>(r), static_cast<std::size_t>(r0), ws,
                     zhat.data());
        zhat.noalias() += Et * y;
        for (Index k = 0; k < r; ++k)
            ztrue(k) = f_vals[static_cast<std::size_t>(k)] * xs[f_nodes[static_cast<std::size_t>(k)]];
        trace.estimates.row(static_cast<Index>(row)) = zhat.transpose();
        trace.error_norms(static_cast<Index>(row)) = (ztrue - zhat).norm();
    };

    auto rhs = [&](double t, const Vector& xw, Vector& dxw) {
        const double* xs = xw.data();
        const double* ws = xw.data() + n;
        double* dx = dxw.data();
        double* dw = dxw.data() + n;
        Acsr.multiply(xs, dx);  // dx = A x
        uin = u(t);
        if (uin.size() != B.cols()) throw InputError("cosimulate: u(t) width mismatch");
        Vector Bu = B_rm * uin;
        ops.axpy(1.0, Bu.data(), dx, static_cast<std::size_t>(n));
        for (Index k = 0; k < q; ++k)
            ytmp(k) = c_vals[static_cast<std::size_t>(k)] * xs[c_nodes[static_cast<std::size_t>(k)]];
        ops.gemv_row(N_rm.data(), static_cast<std::size_t>(r0), static_cast<std::size_t>(r0), ws,
                     dw);  // dw = N w
        Vector Jy = J_rm * ytmp;
        ops.axpy(1.0, Jy.data(), dw, static_cast<std::size_t>(r0));
        Vector Hu = H_rm * uin;
        ops.axpy(1.0, Hu.data(), dw, static_cast<std::size_t>(r0));
    };

    Vector k1(n + r0), k2(n + r0), k3(n + r0), k4(n + r0), tmp(n + r0);
    double t = 0.0;
    trace.times[0] = 0.0;
    trace.states.row(0) = state.transpose();
    outputs(0);
    for (std::size_t s = 0; s < nsteps; ++s) {
        double h = std::min(dt, tf - t);
        rhs(t, state, k1);
        tmp = state + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = state + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = state + h * k3;
        rhs(t + h, tmp, k4);
        state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (s + 1 == nsteps) ? tf : t + h;
        if (kernels::has_nonfinite(state.data(), static_cast<std::size_t>(state.size()))) {
            std::ostringstream os;
            os << "cosimulate: diverged at step " << s + 1 << ", t = " << t;
            throw NumericError(os.str());
        }
        trace.times[s + 1] = t;
        trace.states.row(static_cast<Index>(s + 1)) = state.transpose();
        outputs(s + 1);
    }
    return trace;
}

double rmse_window(const std::vector<double>& times, const Matrix& a, const Matrix& b,
                   double t_start, double t_d) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InputError("rmse_window: signal shape mismatch");
    if (static_cast<Index>(times.size()) != a.rows())
        throw InputError("rmse_window: time grid mismatch");
    if (!(t_d > 0.0)) throw InputError("rmse_window: t_d must be positive");
    if (times.size() < 2) throw InputError("rmse_window: empty window");
    const double dt = times[1] - times[0];
    const double t_end = t_start + t_d;
    auto index_of = [&](double tt) {
        double k = (tt - times[0]) / dt;
        Index i = static_cast<Index>(std::llround(k));
        if (i < 0 || i >= static_cast<Index>(times.size()) ||
            std::abs(times[static_cast<std::size_t>(i)] - tt) > 1e-6 * std::max(1.0, std::abs(tt)))
            throw InputError("rmse_window: window bound off the sample grid");
        return i;
    };
    Index i0 = index_of(t_start);
    Index i1 = index_of(t_end);
    if (i1 <= i0) throw InputError("rmse_window: empty window");
    double acc = 0.0;
    for (Index i = i0; i <= i1; ++i) {
        double w = (i == i0 || i == i1) ? 0.5 : 1.0;
        acc += w * (a.row(i) - b.row(i)).squaredNorm();
    }
    return std::sqrt(acc * dt / t_d);
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    out << "t";
    for (Index j = 0; j < trace.states.cols(); ++j) out << ",x" << j;
    for (Index j = 0; j < trace.estimates.cols(); ++j) out << ",zhat" << j;
    if (trace.error_norms.size()) out << ",err_norm";
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < trace.steps(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", trace.times[i]);
        out << buf;
        for (Index j = 0; j < trace.states.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", trace.states(static_cast<Index>(i), j));
            out << ',' << buf;
        }
        for (Index j = 0; j < trace.estimates.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", trace.estimates(static_cast<Index>(i), j));
            out << ',' << buf;
        }
        if (trace.error_norms.size()) {
            std::snprintf(buf, sizeof buf, "%.17g", trace.error_norms(static_cast<Index>(i)));
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace netobs::sim
