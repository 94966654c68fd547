#pragma once

#include <cstddef>
#include <vector>

// Data-parallel inner loops used by the simulation hot path (RK4 stages,
// co-simulation, RMSE accumulation). Each kernel has a scalar reference
// implementation and an AVX2+FMA variant; the active set is selected once
// at startup from CPUID. The two variants are equivalence-tested against
// each other in tests/test_kernels.cpp.

namespace netobs::kernels {

struct Ops {
    // y += a*x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y = a*x + b*y
    void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    // y = A x, A row-major m x n
    void (*gemv_row)(const double* a, std::size_t m, std::size_t n, const double* x, double* y);
    // y = A x, A in CSR form (row_ptr has m+1 entries)
    void (*spmv_csr)(const int* row_ptr, const int* col, const double* val, std::size_t m,
                     const double* x, double* y);
};

/// Scalar reference kernels (always available).
const Ops& scalar_ops();

/// AVX2+FMA kernels; null member behavior undefined if unsupported (query
/// have_avx2() first). Compiled in a separate TU with -mavx2 -mfma.
const Ops& avx2_ops();

bool have_avx2();

/// Kernels selected at runtime: AVX2 when the CPU supports it, else scalar.
const Ops& active_ops();

/// Name of the active variant ("avx2" or "scalar"), for logs/headers.
const char* active_name();

/// true if any entry is NaN or +-Inf.
bool has_nonfinite(const double* x, std::size_t n);

// Compressed sparse row matrix (square or rectangular), used for the plant
// side of co-simulations where A is a sparse network matrix.
struct CsrMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<int> row_ptr;  // rows+1
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const double* x, double* y) const {
        active_ops().spmv_csr(row_ptr.data(), col.data(), val.data(), rows, x, y);
    }
};

/// Build CSR from triplets (i, j, value); duplicates are summed.
CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols,
                            std::vector<std::tuple<int, int, double>> triplets);

}  // namespace netobs::kernels
