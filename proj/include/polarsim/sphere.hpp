#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "polarsim/error.hpp"

namespace polarsim {

inline constexpr double kUnitNormTolerance = 1e-9;
inline constexpr double kZeroNormThreshold = 1e-12;

/// A point on S^(d-1), d >= 2. Construction checks the norm; use
/// project_to_sphere() to normalize arbitrary input.
class UnitVector {
public:
    UnitVector() = default;
    explicit UnitVector(std::vector<double> coords);
    UnitVector(std::initializer_list<double> coords) : UnitVector(std::vector<double>(coords)) {}

    /// Standard basis vector e_{index} (0-based) in dimension d.
    static UnitVector basis(std::size_t d, std::size_t index);

    std::size_t dim() const noexcept { return coords_.size(); }
    double operator[](std::size_t k) const { return coords_[k]; }
    std::span<const double> coords() const noexcept { return coords_; }
    UnitVector negated() const;

    bool operator==(const UnitVector&) const = default;

private:
    struct Unchecked {};
    UnitVector(std::vector<double> coords, Unchecked) : coords_(std::move(coords)) {}
    friend UnitVector project_to_sphere(std::span<const double> v);

    std::vector<double> coords_;
};

/// Ordered tuple of n unit vectors sharing one dimension, stored row-major so
/// the kernels can stream over agents.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(const std::vector<UnitVector>& agents);

    /// Adopts a row-major n x d buffer; every row must already be unit norm.
    static Configuration from_rows(std::size_t n, std::size_t d, std::vector<double> rows);

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
    std::span<const double> data() const noexcept { return data_; }
    UnitVector agent(std::size_t i) const;
    std::vector<UnitVector> agents() const;

    bool operator==(const Configuration&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> data_;
};

/// Per-agent signs in {-1,+1}. The canonical representative of the pair
/// {sigma, -sigma} has signs[0] == +1.
class SignPattern {
public:
    SignPattern() = default;
    explicit SignPattern(std::vector<int> signs);
    static SignPattern all_positive(std::size_t n) { return SignPattern(std::vector<int>(n, 1)); }
    /// Pattern whose sign i is -1 iff bit (i-1) of `bits` is set; sign 0 is +1.
    static SignPattern from_canonical_bits(std::size_t n, std::uint64_t bits);

    std::size_t size() const noexcept { return signs_.size(); }
    int operator[](std::size_t i) const { return signs_[i]; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    SignPattern canonical() const;
    bool is_canonical() const { return signs_.empty() || signs_[0] == 1; }
    /// Index of the canonical form among the 2^(n-1) canonical patterns.
    std::uint64_t canonical_index() const;

    bool operator==(const SignPattern&) const = default;

private:
    std::vector<int> signs_;
};

struct PolarizedDistance {
    double rho = 0.0;
    SignPattern argmin_pattern;
    UnitVector argmin_center;
    /// false when produced by the heuristic search (rho is then an upper bound).
    bool exact = true;
};

enum class RhoMode { Exact, Heuristic };

inline constexpr std::size_t kExactRhoMaxAgents = 24;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// v / |v|. Throws ErrorCode::ZeroVector when |v| < 1e-12.
UnitVector project_to_sphere(std::span<const double> v);

/// Angle in [0, pi]. Uses 2*asin(|u-v|/2) near 0 and pi so tiny angles keep
/// full relative precision.
double angle(const UnitVector& u, const UnitVector& v);
double angle(std::span<const double> u, std::span<const double> v);

Configuration apply_signs(const Configuration& x, const SignPattern& signs);

/// rho(X, P): distance to the set of configurations whose agents agree up to
/// sign. Exact mode enumerates the 2^(n-1) canonical patterns (n <= 24).
PolarizedDistance distance_to_polarized(const Configuration& x, RhoMode mode = RhoMode::Exact);

/// Largest raw pairwise angle, 0 for a single agent.
double max_pairwise_angle(const Configuration& x);

struct SignAlignment {
    SignPattern pattern;
    Configuration aligned;
};

/// Greedy signing against the running sum; the first sign is always +1.
SignAlignment canonical_sign_alignment(const Configuration& x);

}  // namespace polarsim
