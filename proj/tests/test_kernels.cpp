#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "polarsim/kernels.hpp"
#include "polarsim/rng.hpp"
#include "test_support.hpp"

using namespace polarsim;

namespace {

std::vector<double> random_rows(RngStream& rng, std::size_t n, std::size_t d) {
    std::vector<double> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const UnitVector u = rng.haar(d);
        rows.insert(rows.end(), u.coords().begin(), u.coords().end());
    }
    return rows;
}

oracle::Rows split_rows(const std::vector<double>& rows, std::size_t n, std::size_t d) {
    oracle::Rows out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].assign(rows.begin() + i * d, rows.begin() + (i + 1) * d);
    return out;
}

}  // namespace

TEST_CASE("isa names and dispatch report") {
    CHECK(kernels::isa_name(kernels::Isa::Scalar) == "scalar");
    CHECK(kernels::isa_name(kernels::Isa::Avx2) == "avx2");
    if (!kernels::avx2_available()) CHECK(kernels::active_isa() == kernels::Isa::Scalar);
    MESSAGE("active kernels: " << kernels::isa_name(kernels::active_isa()));
}

TEST_CASE("scalar max_signed_sum matches full enumeration") {
    RngStream rng(41, 0);
    for (std::size_t n = 1; n <= 14; ++n) {
        for (int trial = 0; trial < 8; ++trial) {
            const std::size_t d = 2 + static_cast<std::size_t>(trial % 4);
            const auto rows = random_rows(rng, n, d);
            const auto got = kernels::scalar::max_signed_sum(rows, n, d);
            const double ref = oracle::brute_max_signed_sum_sq(split_rows(rows, n, d));
            CHECK(got.best_norm_sq == doctest::Approx(ref).epsilon(1e-12));
            CHECK(got.best_bits < (std::uint64_t{1} << (n - 1)));

            std::vector<double> s(d);
            kernels::detail::signed_sum(rows, n, d, got.best_bits, s.data());
            double sq = 0.0;
            for (double c : s) sq += c * c;
            CHECK(sq == doctest::Approx(got.best_norm_sq).epsilon(1e-12));
        }
    }
}

TEST_CASE("sign search survives many resync periods") {
    RngStream rng(43, 0);
    const std::size_t n = 16;
    const std::size_t d = 3;
    const auto rows = random_rows(rng, n, d);
    const auto got = kernels::scalar::max_signed_sum(rows, n, d);
    CHECK(got.best_norm_sq == doctest::Approx(oracle::brute_max_signed_sum_sq(split_rows(rows, n, d))).epsilon(1e-12));
}

#ifdef POLARSIM_HAVE_AVX2
TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
    if (!kernels::avx2_available()) {
        MESSAGE("host lacks AVX2; skipping equivalence");
        return;
    }
    RngStream rng(47, 0);
    for (std::size_t n = 1; n <= 18; ++n) {
        for (int trial = 0; trial < 6; ++trial) {
            const std::size_t d = 2 + static_cast<std::size_t>(trial % 5);
            const auto rows = random_rows(rng, n, d);
            const auto s = kernels::scalar::max_signed_sum(rows, n, d);
            const auto v = kernels::avx2::max_signed_sum(rows, n, d);
            CHECK(s.best_norm_sq == v.best_norm_sq);
            CHECK(s.best_bits == v.best_bits);

            const UnitVector xi = rng.haar(d);
            std::vector<double> a(n), b(n);
            kernels::scalar::dot_rows(rows, d, xi.coords(), a);
            kernels::avx2::dot_rows(rows, d, xi.coords(), b);
            for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);
        }
    }
}

TEST_CASE("avx2 tie-breaking matches scalar on symmetric input") {
    if (!kernels::avx2_available()) return;
    // every agent identical: all patterns except the all-equal one tie below it,
    // and mirror pairs of agents create exact ties among the rest
    const std::size_t n = 8;
    const std::size_t d = 2;
    std::vector<double> rows;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(i % 2 == 0 ? 1.0 : 0.0);
        rows.push_back(i % 2 == 0 ? 0.0 : 1.0);
    }
    const auto s = kernels::scalar::max_signed_sum(rows, n, d);
    const auto v = kernels::avx2::max_signed_sum(rows, n, d);
    CHECK(s.best_norm_sq == v.best_norm_sq);
    CHECK(s.best_bits == v.best_bits);
    CHECK(s.best_norm_sq == doctest::Approx(32.0));
}
#endif

TEST_CASE("dot_rows matches a plain loop") {
    RngStream rng(53, 0);
    for (std::size_t n : {1u, 3u, 4u, 7u, 33u}) {
        const std::size_t d = 3;
        const auto rows = random_rows(rng, n, d);
        const UnitVector v = rng.haar(d);
        std::vector<double> out(n);
        kernels::dot_rows(rows, d, v.coords(), out);
        for (std::size_t i = 0; i < n; ++i) {
            const double ref = rows[i * d] * v[0] + rows[i * d + 1] * v[1] + rows[i * d + 2] * v[2];
            CHECK(out[i] == ref);
        }
    }
}
