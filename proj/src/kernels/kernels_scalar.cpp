#include "polarsim/kernels.hpp"

#include <array>
#include <bit>
#include <vector>

namespace polarsim::kernels {

namespace detail {

void signed_sum(std::span<const double> rows, std::size_t n, std::size_t d, std::uint64_t bits,
                double* out) {
    for (std::size_t k = 0; k < d; ++k) out[k] = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double sign = (a > 0 && ((bits >> (a - 1)) & 1u)) ? -1.0 : 1.0;
        const double* x = rows.data() + a * d;
        for (std::size_t k = 0; k < d; ++k) out[k] += sign * x[k];
    }
}

}  // namespace detail

namespace scalar {

void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* r = rows.data() + i * d;
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += r[k] * v[k];
        out[i] = acc;
    }
}

namespace {

double norm_sq(const double* s, std::size_t d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += s[k] * s[k];
    return acc;
}

SignSearchResult small_search(std::span<const double> rows, std::size_t n, std::size_t d) {
    SignSearchResult best{-1.0, 0};
    std::vector<double> sum(d);
    const std::uint64_t count = n == 0 ? 1 : (std::uint64_t{1} << (n - 1));
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        detail::signed_sum(rows, n, d, bits, sum.data());
        const double nsq = norm_sq(sum.data(), d);
        if (nsq > best.best_norm_sq) best = {nsq, bits};
    }
    return best;
}

}  // namespace

SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d) {
    if (n <= 2) return small_search(rows, n, d);

    // Four lanes own the two highest pattern bits; each walks the same Gray
    // code over the low n-3 bits. The AVX2 variant runs the lanes in parallel.
    constexpr std::size_t kLanes = 4;
    const std::size_t low_bits = n - 3;
    const std::uint64_t steps = std::uint64_t{1} << low_bits;

    std::vector<double> sums(kLanes * d);
    std::array<double, kLanes> best{};
    std::array<std::uint64_t, kLanes> best_gray{};
    for (std::size_t lane = 0; lane < kLanes; ++lane) {
        detail::signed_sum(rows, n, d, std::uint64_t{lane} << low_bits, &sums[lane * d]);
        best[lane] = norm_sq(&sums[lane * d], d);
        best_gray[lane] = 0;
    }

    for (std::uint64_t g = 1; g < steps; ++g) {
        const std::uint64_t gray = g ^ (g >> 1);
        if (g % kSignSearchResyncPeriod == 0) {
            for (std::size_t lane = 0; lane < kLanes; ++lane)
                detail::signed_sum(rows, n, d, (std::uint64_t{lane} << low_bits) | gray,
                                   &sums[lane * d]);
        } else {
            const int bit = std::countr_zero(g);
            const double scale = ((gray >> bit) & 1u) ? -2.0 : 2.0;
            const double* x = rows.data() + (static_cast<std::size_t>(bit) + 1) * d;
            for (std::size_t k = 0; k < d; ++k) {
                const double delta = scale * x[k];
                for (std::size_t lane = 0; lane < kLanes; ++lane) sums[lane * d + k] += delta;
            }
        }
        for (std::size_t lane = 0; lane < kLanes; ++lane) {
            const double nsq = norm_sq(&sums[lane * d], d);
            if (nsq > best[lane]) {
                best[lane] = nsq;
                best_gray[lane] = gray;
            }
        }
    }

    SignSearchResult result{best[0], best_gray[0]};
    for (std::size_t lane = 1; lane < kLanes; ++lane) {
        if (best[lane] > result.best_norm_sq)
            result = {best[lane], (std::uint64_t{lane} << low_bits) | best_gray[lane]};
    }
    return result;
}

}  // namespace scalar
}  // namespace polarsim::kernels
