#pragma once

#include "netobs/common.hpp"
#include "netobs/design.hpp"
#include "netobs/kernels.hpp"
#include "netobs/obsv.hpp"

#include <functional>

namespace netobs::sim {

// Uniform-grid trace: states (and optionally target estimates + error
// norms) per step.
struct SimTrace {
    std::vector<double> times;
    Matrix states;      // step x n
    Matrix estimates;   // step x r (empty when no observer)
    Vector error_norms; // ||z - z_hat'|| per step (empty when no observer)

    std::size_t steps() const { return times.size(); }
};

using Rhs = std::function<void(double t, const Vector& x, Vector& dxdt)>;

/// Classical fixed-step RK4; the final step is shortened to land exactly on
/// tf. Throws NumericError (with the step index) if the state leaves the
/// finite range.
SimTrace rk4_integrate(const Rhs& rhs, const Vector& x0, double t0, double tf, double dt);

/// Input signal u(t); `step_input(c)` is the paper's step excitation.
using InputSignal = std::function<Vector(double t)>;
InputSignal step_input(double value, Index dim = 1);
InputSignal zero_input(Index dim = 1);

/// Integrate plant and observer together, recording target estimates and
/// error norms. The plant A is applied in CSR form; the observer blocks are
/// dense (kernel-dispatched inner loops).
SimTrace cosimulate(const obsv::NumericSystem& plant, const design::ObserverRealization& obs,
                    const InputSignal& u, const Vector& x0, const Vector& w0, double dt,
                    double tf);

/// sqrt( (1/t_d) * integral over [t_start, t_start+t_d] of ||a-b||^2 ),
/// trapezoid rule on the shared uniform grid.
double rmse_window(const std::vector<double>& times, const Matrix& a, const Matrix& b,
                   double t_start, double t_d);

/// Write a trace as CSV: header `t,<state cols...>,<estimate cols...>,err_norm`.
void write_trace_csv(const SimTrace& trace, std::ostream& out);

}  // namespace netobs::sim
