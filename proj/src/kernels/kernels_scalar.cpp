#include "netobs/kernels.hpp"

#include <cmath>

namespace netobs::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_sq_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void gemv_row_scalar(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void spmv_csr_scalar(const int* row_ptr, const int* col, const double* val, std::size_t m,
                     const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{axpy_scalar, axpby_scalar, dot_scalar, sum_sq_scalar,
                         gemv_row_scalar, spmv_csr_scalar};
    return ops;
}

bool has_nonfinite(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return true;
    return false;
}

}  // namespace netobs::kernels
