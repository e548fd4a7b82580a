#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "polarsim/rng.hpp"

using namespace polarsim;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of (seed, stream)") {
    RngStream a(123, 7), b(123, 7), c(123, 8), e(124, 7);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        differs_stream |= va != c.next_u64();
        differs_seed |= va != e.next_u64();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
    CHECK(a.counter() == 1000);
}

TEST_CASE("uniform, below and normal moments") {
    RngStream rng(99, 0);
    const int m = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    std::array<int, 7> bins{};
    for (int i = 0; i < m; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        ++bins[rng.below(7)];
    }
    CHECK(std::abs(su / m - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / m));
    CHECK(std::abs(sn / m) < 5.0 / std::sqrt(m));
    CHECK(std::abs(sn2 / m - 1.0) < 5.0 * std::sqrt(2.0 / m));
    for (int count : bins) CHECK(std::abs(count - m / 7.0) < 5.0 * std::sqrt(m / 7.0));
    CHECK(rng.below(1) == 0);
}

TEST_CASE("haar draws are unit and centred") {
    RngStream rng(5, 3);
    std::vector<double> mean(4, 0.0);
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const UnitVector u = rng.haar(4);
        REQUIRE(std::abs(norm(u.coords()) - 1.0) < 1e-12);
        for (std::size_t k = 0; k < 4; ++k) mean[k] += u[k] / m;
    }
    CHECK(norm(mean) < 0.02);
}
