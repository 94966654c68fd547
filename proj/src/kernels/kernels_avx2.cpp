// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here may be called unless have_avx2() is true.

#include "netobs/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define NETOBS_X86 1
#include <immintrin.h>
#else
#define NETOBS_X86 0
#endif

namespace netobs::kernels {

#if NETOBS_X86

namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_mul_pd(bv, _mm256_loadu_pd(y + i));
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_sq_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void gemv_row_avx2(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) y[i] = dot_avx2(a + i * n, x, n);
}

void spmv_csr_avx2(const int* row_ptr, const int* col, const double* val, std::size_t m,
                   const double* x, double* y) {
    // Gathers do not pay off for the short sparse rows we see (network
    // matrices, ~2-10 nnz/row); plain scalar accumulation per row wins.
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{axpy_avx2, axpby_avx2, dot_avx2, sum_sq_avx2,
                         gemv_row_avx2, spmv_csr_avx2};
    return ops;
}

#else  // non-x86 build: no AVX2 variant, dispatch falls back to scalar

const Ops& avx2_ops() { return scalar_ops(); }

#endif

}  // namespace netobs::kernels
