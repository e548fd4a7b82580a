#pragma once

#include <cstddef>
#include <optional>

#include "polarsim/rng.hpp"
#include "polarsim/sphere.hpp"

namespace polarsim {

struct PhiResult {
    /// min over unit v of max_i angle(v, x_i), radians.
    double phi = 0.0;
    UnitVector center;
    std::size_t iterations = 0;
    /// Optimality gap of the reported center; +inf marks a best-effort answer
    /// for inputs that are not one-sided (0 in the hull).
    double residual = 0.0;
    bool certified() const;
};

inline constexpr double kPhiDefaultTolerance = 1e-7;

/// Minimax angle potential. One-sided inputs are solved exactly through the
/// minimum-norm point of the hull (its direction is the optimal center);
/// other inputs fall back to projected supergradient ascent with step 1/sqrt(k)
/// and a 50-iteration patience window.
///
/// Throws DegenerateInput when two agents are exactly antipodal.
PhiResult phi_potential(const Configuration& x, double tol = kPhiDefaultTolerance);

/// Rejection-samples a Haar direction z with |<z, x_i>| >= lambda for all i.
/// Throws InvalidLambda unless 0 < lambda < 1.
std::optional<UnitVector> margin_direction(const Configuration& x, double lambda,
                                           std::size_t max_trials, RngStream& rng);

inline constexpr std::size_t kDefaultMarginTrials = 100000;

}  // namespace polarsim
