#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
//
// Both variants perform the same floating-point operations in the same order
// per lane (the build disables FMA contraction), so their results are
// bit-identical and simulation output does not depend on the host ISA.
// The dispatching entry points pick the variant once per process; set
// POLARSIM_KERNELS=scalar to force the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace polarsim::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool avx2_available();
Isa active_isa();

struct SignSearchResult {
    /// max over canonical sign patterns of |sum_i sigma_i x_i|^2
    double best_norm_sq = 0.0;
    /// canonical bits of the maximizing pattern (bit k <-> agent k+1 negated)
    std::uint64_t best_bits = 0;
};

/// Flips between full recomputations of the running sums.
inline constexpr std::uint64_t kSignSearchResyncPeriod = 1024;

/// out[i] = <rows[i*d .. i*d+d), v> for i < out.size().
void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out);

/// Exhaustive Gray-code search over the 2^(n-1) canonical sign patterns.
/// Ties resolve to the lowest lane, then the earliest Gray code.
SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d);

namespace scalar {
void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out);
SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d);
}  // namespace scalar

namespace avx2 {
// Callable only when avx2_available().
void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out);
SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d);
}  // namespace avx2

namespace detail {
// Shared by both variants so resynchronized sums are computed identically.
void signed_sum(std::span<const double> rows, std::size_t n, std::size_t d, std::uint64_t bits,
                double* out);
}  // namespace detail

}  // namespace polarsim::kernels
