#include "polarsim/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "polarsim/hull.hpp"

namespace polarsim {

bool PhiResult::certified() const { return std::isfinite(residual); }

namespace {

constexpr double kOneSidedThreshold = 1e-10;
constexpr std::size_t kPatience = 50;
constexpr std::size_t kSupergradientMaxIterations = 100000;

void reject_antipodal(const Configuration& x) {
    const std::size_t d = x.dim();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double v = x.row(i)[k] + x.row(j)[k];
                s += v * v;
            }
            if (std::sqrt(s) <= kZeroNormThreshold)
                throw Error(ErrorCode::DegenerateInput,
                            "agents " + std::to_string(i) + " and " + std::to_string(j) +
                                " are antipodal");
        }
}

double min_inner(const Configuration& x, std::span<const double> v) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) lo = std::min(lo, dot(x.row(i), v));
    return lo;
}

PhiResult supergradient(const Configuration& x, double tol) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) mean[k] += x.row(i)[k] / static_cast<double>(n);
    UnitVector v = norm(mean) >= kZeroNormThreshold ? project_to_sphere(mean) : x.agent(0);

    UnitVector best = v;
    double best_value = min_inner(x, v.coords());
    std::size_t stale = 0;
    std::size_t k = 1;
    std::vector<double> ascent(d);
    std::vector<double> next(d);
    for (; k < kSupergradientMaxIterations && stale < kPatience; ++k) {
        const double lo = min_inner(x, v.coords());
        std::fill(ascent.begin(), ascent.end(), 0.0);
        double ties = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dot(x.row(i), v.coords()) <= lo + 1e-12) {
                for (std::size_t c = 0; c < d; ++c) ascent[c] += x.row(i)[c];
                ties += 1.0;
            }
        }
        const double step = 1.0 / std::sqrt(static_cast<double>(k));
        for (std::size_t c = 0; c < d; ++c) next[c] = v[c] + step * ascent[c] / ties;
        if (norm(next) < kZeroNormThreshold) break;
        v = project_to_sphere(next);

        const double value = min_inner(x, v.coords());
        if (value > best_value + tol) {
            best_value = value;
            best = v;
            stale = 0;
        } else {
            if (value > best_value) {
                best_value = value;
                best = v;
            }
            ++stale;
        }
    }

    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) phi = std::max(phi, angle(best.coords(), x.row(i)));
    return PhiResult{phi, std::move(best), k, std::numeric_limits<double>::infinity()};
}

}  // namespace

PhiResult phi_potential(const Configuration& x, double tol) {
    if (x.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty configuration");
    if (x.size() == 1) return PhiResult{0.0, x.agent(0), 0, 0.0};
    reject_antipodal(x);

    const MinNormPoint mnp = min_norm_point(x.data(), x.size(), x.dim());
    const double length = norm(mnp.point);
    if (length < kOneSidedThreshold) return supergradient(x, tol);

    UnitVector center = project_to_sphere(mnp.point);
    double phi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) phi = std::max(phi, angle(center.coords(), x.row(i)));
    return PhiResult{phi, std::move(center), mnp.iterations, mnp.gap / length};
}

std::optional<UnitVector> margin_direction(const Configuration& x, double lambda,
                                           std::size_t max_trials, RngStream& rng) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw Error(ErrorCode::InvalidLambda, "lambda must lie in (0, 1), got " + std::to_string(lambda));
    for (std::size_t trial = 0; trial < max_trials; ++trial) {
        UnitVector z = rng.haar(x.dim());
        bool ok = true;
        for (std::size_t i = 0; i < x.size() && ok; ++i) ok = std::abs(dot(z.coords(), x.row(i))) >= lambda;
        if (ok) return z;
    }
    return std::nullopt;
}

}  // namespace polarsim
