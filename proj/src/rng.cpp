#include "polarsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace polarsim {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t slot = drawn_ & 1u;
    if (slot == 0) {
        const std::uint64_t block = drawn_ >> 1;
        const auto out = philox4x32_10(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        block_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        block_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    }
    ++drawn_;
    return block_[slot];
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::normal() {
    if (spare_normal_valid_) {
        spare_normal_valid_ = false;
        return spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phase = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(phase);
    spare_normal_valid_ = true;
    return r * std::cos(phase);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    // Lemire's multiply-shift with rejection of the biased low range.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

UnitVector RngStream::haar(std::size_t d) {
    std::vector<double> g(d);
    for (;;) {
        for (double& x : g) x = normal();
        if (norm(g) >= 1e-6) return project_to_sphere(g);
    }
}

}  // namespace polarsim
