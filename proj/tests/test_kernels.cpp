#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netobs/kernels.hpp"
#include "netobs/rng.hpp"

#include <cmath>
#include <vector>

using namespace netobs;
using kernels::scalar_ops;

namespace {
std::vector<double> random_vec(Pcg32& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}
}  // namespace

TEST_CASE("scalar and dispatched kernels agree") {
    const auto& act = kernels::active_ops();
    const auto& ref = scalar_ops();
    Pcg32 rng(42);
    // odd lengths exercise the vector remainders
    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 64u, 129u, 1000u}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);

        auto y1 = y, y2 = y;
        ref.axpy(1.7, x.data(), y1.data(), n);
        act.axpy(1.7, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

        y1 = y;
        y2 = y;
        ref.axpby(0.3, x.data(), -1.1, y1.data(), n);
        act.axpby(0.3, x.data(), -1.1, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

        double d1 = ref.dot(x.data(), y.data(), n);
        double d2 = act.dot(x.data(), y.data(), n);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
        CHECK(ref.sum_sq(x.data(), n) == doctest::Approx(act.sum_sq(x.data(), n)).epsilon(1e-12));
    }
}

TEST_CASE("gemv variants agree on random shapes") {
    const auto& act = kernels::active_ops();
    const auto& ref = scalar_ops();
    Pcg32 rng(7);
    for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{
             {1, 1}, {3, 5}, {8, 8}, {17, 31}, {100, 100}}) {
        auto a = random_vec(rng, m * n);
        auto x = random_vec(rng, n);
        std::vector<double> y1(m), y2(m);
        ref.gemv_row(a.data(), m, n, x.data(), y1.data());
        act.gemv_row(a.data(), m, n, x.data(), y2.data());
        for (std::size_t i = 0; i < m; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
    }
}

TEST_CASE("csr multiply matches dense accumulation") {
    Pcg32 rng(11);
    const std::size_t n = 60;
    std::vector<std::tuple<int, int, double>> trip;
    std::vector<double> dense(n * n, 0.0);
    for (int k = 0; k < 400; ++k) {
        int i = static_cast<int>(rng.next_below(n));
        int j = static_cast<int>(rng.next_below(n));
        double v = rng.uniform(-1.0, 1.0);
        trip.emplace_back(i, j, v);
        dense[static_cast<std::size_t>(i) * n + j] += v;  // duplicates must sum
    }
    auto csr = kernels::csr_from_triplets(n, n, trip);
    auto x = random_vec(rng, n);
    std::vector<double> y1(n), y2(n);
    csr.multiply(x.data(), y1.data());
    scalar_ops().gemv_row(dense.data(), n, n, x.data(), y2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
}

TEST_CASE("nonfinite detection") {
    std::vector<double> v{1.0, 2.0, 3.0};
    CHECK_FALSE(kernels::has_nonfinite(v.data(), v.size()));
    v[1] = std::nan("");
    CHECK(kernels::has_nonfinite(v.data(), v.size()));
    v[1] = INFINITY;
    CHECK(kernels::has_nonfinite(v.data(), v.size()));
}
