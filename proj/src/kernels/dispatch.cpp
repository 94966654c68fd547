#include "netobs/kernels.hpp"

#include <algorithm>
#include <tuple>

namespace netobs::kernels {

bool have_avx2() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

const Ops& active_ops() { return have_avx2() ? avx2_ops() : scalar_ops(); }

const char* active_name() { return have_avx2() ? "avx2" : "scalar"; }

CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols,
                            std::vector<std::tuple<int, int, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        auto [i, j, v] = triplets[k];
        if (!m.col.empty() && k > 0 && std::get<0>(triplets[k - 1]) == i &&
            std::get<1>(triplets[k - 1]) == j) {
            m.val.back() += v;  // merge duplicates
        } else {
            m.col.push_back(j);
            m.val.push_back(v);
            m.row_ptr[i + 1] = static_cast<int>(m.col.size());
        }
    }
    // fill row_ptr for rows recorded so far and empty rows
    for (std::size_t i = 1; i <= rows; ++i)
        m.row_ptr[i] = std::max(m.row_ptr[i], m.row_ptr[i - 1]);
    return m;
}

}  // namespace netobs::kernels
