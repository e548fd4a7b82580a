#include "polarsim/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "polarsim/kernels.hpp"

namespace polarsim {

namespace {

void require_same_dim(std::size_t a, std::size_t b) {
    if (a != b)
        throw Error(ErrorCode::DimensionMismatch,
                    "dimension " + std::to_string(a) + " vs " + std::to_string(b));
}

void check_unit(std::span<const double> coords) {
    if (coords.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "unit vectors need d >= 2");
    const double r = norm(coords);
    if (!(std::abs(r - 1.0) <= kUnitNormTolerance))
        throw Error(ErrorCode::InvalidArgument, "norm " + std::to_string(r) + " is not 1");
}

}  // namespace

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
    check_unit(coords_);
}

UnitVector UnitVector::basis(std::size_t d, std::size_t index) {
    if (index >= d) throw Error(ErrorCode::InvalidArgument, "basis index out of range");
    std::vector<double> c(d, 0.0);
    c[index] = 1.0;
    return UnitVector(std::move(c));
}

UnitVector UnitVector::negated() const {
    std::vector<double> c(coords_.size());
    std::transform(coords_.begin(), coords_.end(), c.begin(), [](double x) { return -x; });
    return UnitVector(std::move(c), Unchecked{});
}

Configuration::Configuration(const std::vector<UnitVector>& agents) {
    if (agents.empty()) throw Error(ErrorCode::InvalidArgument, "configuration needs n >= 1");
    n_ = agents.size();
    d_ = agents.front().dim();
    data_.reserve(n_ * d_);
    for (const auto& a : agents) {
        require_same_dim(d_, a.dim());
        data_.insert(data_.end(), a.coords().begin(), a.coords().end());
    }
}

Configuration Configuration::from_rows(std::size_t n, std::size_t d, std::vector<double> rows) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "configuration needs n >= 1");
    if (rows.size() != n * d) throw Error(ErrorCode::DimensionMismatch, "row buffer size");
    Configuration c;
    c.n_ = n;
    c.d_ = d;
    c.data_ = std::move(rows);
    for (std::size_t i = 0; i < n; ++i) check_unit(c.row(i));
    return c;
}

UnitVector Configuration::agent(std::size_t i) const {
    auto r = row(i);
    return UnitVector(std::vector<double>(r.begin(), r.end()));
}

std::vector<UnitVector> Configuration::agents() const {
    std::vector<UnitVector> out;
    out.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) out.push_back(agent(i));
    return out;
}

SignPattern::SignPattern(std::vector<int> signs) : signs_(std::move(signs)) {
    for (int s : signs_)
        if (s != 1 && s != -1) throw Error(ErrorCode::InvalidArgument, "signs must be +-1");
}

SignPattern SignPattern::from_canonical_bits(std::size_t n, std::uint64_t bits) {
    std::vector<int> s(n, 1);
    for (std::size_t i = 1; i < n; ++i)
        if ((bits >> (i - 1)) & 1u) s[i] = -1;
    return SignPattern(std::move(s));
}

SignPattern SignPattern::canonical() const {
    if (is_canonical()) return *this;
    std::vector<int> s(signs_);
    for (int& v : s) v = -v;
    return SignPattern(std::move(s));
}

std::uint64_t SignPattern::canonical_index() const {
    const SignPattern c = canonical();
    std::uint64_t bits = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] == -1) bits |= std::uint64_t{1} << (i - 1);
    return bits;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

UnitVector project_to_sphere(std::span<const double> v) {
    if (v.size() < 2) throw Error(ErrorCode::InvalidArgument, "unit vectors need d >= 2");
    const double r = norm(v);
    if (!(r >= kZeroNormThreshold))
        throw Error(ErrorCode::ZeroVector, "cannot normalize vector of norm " + std::to_string(r));
    std::vector<double> c(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) c[k] = v[k] / r;
    return UnitVector(std::move(c), UnitVector::Unchecked{});
}

double angle(std::span<const double> u, std::span<const double> v) {
    require_same_dim(u.size(), v.size());
    const double c = dot(u, v);
    if (std::abs(c) < 0.9) return std::acos(c);
    // chord formula: acos loses half the digits near +-1
    double chord = 0.0;
    const double sign = c > 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double diff = u[k] + sign * v[k];
        chord += diff * diff;
    }
    const double half = std::min(1.0, std::sqrt(chord) / 2.0);
    const double small = 2.0 * std::asin(half);
    return c > 0 ? small : std::numbers::pi - small;
}

double angle(const UnitVector& u, const UnitVector& v) { return angle(u.coords(), v.coords()); }

Configuration apply_signs(const Configuration& x, const SignPattern& signs) {
    if (signs.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "sign pattern length");
    std::vector<double> rows(x.data().begin(), x.data().end());
    const std::size_t d = x.dim();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (signs[i] < 0)
            for (std::size_t k = 0; k < d; ++k) rows[i * d + k] = -rows[i * d + k];
    return Configuration::from_rows(x.size(), d, std::move(rows));
}

namespace {

PolarizedDistance finish(const Configuration& x, SignPattern pattern, bool exact) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    if (!pattern.is_canonical()) pattern = pattern.canonical();

    std::vector<double> sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t k = 0; k < d; ++k) sum[k] += pattern[i] * r[k];
    }
    UnitVector center = project_to_sphere(sum);

    // Direct sum of squared residuals; 2n - 2|S| cancels catastrophically near P.
    double rho_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = pattern[i] * r[k] - center[k];
            rho_sq += diff * diff;
        }
    }
    return PolarizedDistance{std::sqrt(rho_sq), std::move(pattern), std::move(center), exact};
}

SignPattern local_search(const Configuration& x, SignPattern start) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    std::vector<int> s = start.signs();
    std::vector<double> sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) sum[k] += s[i] * x.row(i)[k];

    // Flipping i changes |S|^2 by 4 - 4 s_i <x_i, S>.
    for (std::size_t pass = 0; pass < 4 * n + 4; ++pass) {
        std::size_t best = n;
        double best_gain = 1e-12;
        for (std::size_t i = 0; i < n; ++i) {
            const double gain = 4.0 - 4.0 * s[i] * dot(x.row(i), sum);
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (best == n) break;
        for (std::size_t k = 0; k < d; ++k) sum[k] -= 2.0 * s[best] * x.row(best)[k];
        s[best] = -s[best];
    }
    return SignPattern(std::move(s));
}

}  // namespace

PolarizedDistance distance_to_polarized(const Configuration& x, RhoMode mode) {
    const std::size_t n = x.size();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty configuration");
    if (n == 1) return PolarizedDistance{0.0, SignPattern::all_positive(1), x.agent(0), true};

    if (mode == RhoMode::Exact) {
        if (n > kExactRhoMaxAgents)
            throw Error(ErrorCode::ExactTooLarge,
                        "exact rho supports n <= 24, got n = " + std::to_string(n));
        const auto best = kernels::max_signed_sum(x.data(), n, x.dim());
        return finish(x, SignPattern::from_canonical_bits(n, best.best_bits), true);
    }
    return finish(x, local_search(x, canonical_sign_alignment(x).pattern), false);
}

double max_pairwise_angle(const Configuration& x) {
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            best = std::max(best, std::min(angle(x.row(i), x.row(j)), std::numbers::pi));
    return best;
}

SignAlignment canonical_sign_alignment(const Configuration& x) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    std::vector<int> s(n, 1);
    std::vector<double> sum(x.row(0).begin(), x.row(0).end());
    for (std::size_t i = 1; i < n; ++i) {
        s[i] = dot(x.row(i), sum) >= 0.0 ? 1 : -1;
        for (std::size_t k = 0; k < d; ++k) sum[k] += s[i] * x.row(i)[k];
    }
    SignPattern pattern(std::move(s));
    Configuration aligned = apply_signs(x, pattern);
    return SignAlignment{std::move(pattern), std::move(aligned)};
}

}  // namespace polarsim
