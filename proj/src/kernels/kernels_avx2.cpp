// Compiled with -mavx2 (no -mfma). Only reached through the dispatcher after a
// runtime CPU check, or directly from the equivalence tests under the same guard.

#include "polarsim/kernels.hpp"

#include <immintrin.h>

#include <array>
#include <bit>
#include <vector>

namespace polarsim::kernels::avx2 {

namespace {
// wrapper so std::vector keeps the vector type's alignment attributes
struct Lanes {
    __m256d v;
};
}  // namespace

void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out) {
    const std::size_t n = out.size();
    const std::size_t body = (n / 4) * 4;
    const auto stride = static_cast<long long>(d);
    const __m256i offsets = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);

    // 4 agents per register; each lane accumulates over k in scalar order.
    for (std::size_t i = 0; i < body; i += 4) {
        const double* base = rows.data() + i * d;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < d; ++k) {
            const __m256d x = _mm256_i64gather_pd(base + k, offsets, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(x, _mm256_set1_pd(v[k])));
        }
        _mm256_storeu_pd(out.data() + i, acc);
    }

    // tail
    for (std::size_t i = body; i < n; ++i) {
        const double* r = rows.data() + i * d;
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += r[k] * v[k];
        out[i] = acc;
    }
}

SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d) {
    if (n <= 2) return scalar::max_signed_sum(rows, n, d);

    const std::size_t low_bits = n - 3;
    const std::uint64_t steps = std::uint64_t{1} << low_bits;

    std::vector<Lanes> sums(d);
    std::array<double, 4> lane_sum{};
    std::vector<double> scratch(4 * d);

    auto resync = [&](std::uint64_t gray) {
        for (std::size_t lane = 0; lane < 4; ++lane)
            detail::signed_sum(rows, n, d, (std::uint64_t{lane} << low_bits) | gray,
                               &scratch[lane * d]);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t lane = 0; lane < 4; ++lane) lane_sum[lane] = scratch[lane * d + k];
            sums[k].v = _mm256_loadu_pd(lane_sum.data());
        }
    };
    auto norm_sq = [&]() {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < d; ++k) acc = _mm256_add_pd(acc, _mm256_mul_pd(sums[k].v, sums[k].v));
        return acc;
    };

    resync(0);
    __m256d best = norm_sq();
    __m256d best_gray = _mm256_setzero_pd();

    for (std::uint64_t g = 1; g < steps; ++g) {
        const std::uint64_t gray = g ^ (g >> 1);
        if (g % kSignSearchResyncPeriod == 0) {
            resync(gray);
        } else {
            const int bit = std::countr_zero(g);
            const double scale = ((gray >> bit) & 1u) ? -2.0 : 2.0;
            const double* x = rows.data() + (static_cast<std::size_t>(bit) + 1) * d;
            for (std::size_t k = 0; k < d; ++k)
                sums[k].v = _mm256_add_pd(sums[k].v, _mm256_set1_pd(scale * x[k]));
        }
        const __m256d nsq = norm_sq();
        const __m256d better = _mm256_cmp_pd(nsq, best, _CMP_GT_OQ);
        best = _mm256_blendv_pd(best, nsq, better);
        best_gray = _mm256_blendv_pd(best_gray, _mm256_set1_pd(static_cast<double>(gray)), better);
    }

    std::array<double, 4> best_lane{};
    std::array<double, 4> gray_lane{};
    _mm256_storeu_pd(best_lane.data(), best);
    _mm256_storeu_pd(gray_lane.data(), best_gray);

    SignSearchResult result{best_lane[0], static_cast<std::uint64_t>(gray_lane[0])};
    for (std::size_t lane = 1; lane < 4; ++lane) {
        if (best_lane[lane] > result.best_norm_sq)
            result = {best_lane[lane],
                      (std::uint64_t{lane} << low_bits) | static_cast<std::uint64_t>(gray_lane[lane])};
    }
    return result;
}

}  // namespace polarsim::kernels::avx2
