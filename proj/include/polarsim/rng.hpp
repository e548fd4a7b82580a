#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "polarsim/sphere.hpp"

namespace polarsim {

/// Philox4x32-10 block function: one 128-bit output per (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream keyed by (master_seed, stream_index).
///
/// Output depends only on the key pair and on how many values were drawn, so
/// replicas can run on any worker in any order and still see the same numbers.
/// Normals come from a local Box-Muller transform rather than
/// std::normal_distribution, whose output differs between standard libraries.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : seed_(master_seed), stream_(stream_index) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    double normal();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    /// Haar-uniform point on S^(d-1).
    UnitVector haar(std::size_t d);

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_index() const noexcept { return stream_; }
    /// 64-bit words consumed so far.
    std::uint64_t counter() const noexcept { return drawn_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t drawn_ = 0;
    std::array<std::uint64_t, 2> block_{};
    bool spare_normal_valid_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace polarsim
