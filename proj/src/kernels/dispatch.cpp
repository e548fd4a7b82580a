#include "polarsim/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace polarsim::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_available() {
#if defined(POLARSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported;
#else
    return false;
#endif
}

Isa active_isa() {
    static const Isa isa = [] {
        const char* forced = std::getenv("POLARSIM_KERNELS");
        if (forced != nullptr && std::string_view(forced) == "scalar") return Isa::Scalar;
        return avx2_available() ? Isa::Avx2 : Isa::Scalar;
    }();
    return isa;
}

void dot_rows(std::span<const double> rows, std::size_t d, std::span<const double> v,
              std::span<double> out) {
#ifdef POLARSIM_HAVE_AVX2
    if (active_isa() == Isa::Avx2) return avx2::dot_rows(rows, d, v, out);
#endif
    scalar::dot_rows(rows, d, v, out);
}

SignSearchResult max_signed_sum(std::span<const double> rows, std::size_t n, std::size_t d) {
#ifdef POLARSIM_HAVE_AVX2
    if (active_isa() == Isa::Avx2) return avx2::max_signed_sum(rows, n, d);
#endif
    return scalar::max_signed_sum(rows, n, d);
}

}  // namespace polarsim::kernels
