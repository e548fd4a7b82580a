#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polarsim {

using PointList = std::vector<std::vector<double>>;

struct HullCertificate {
    bool contains_zero = false;
    /// Convex coefficients of the final iterate (sum to 1).
    std::vector<double> weights;
    /// Unit direction with <separator, z_i> < 0 for every point; empty when
    /// contains_zero is true.
    std::vector<double> separator;
    /// Norm of the final iterate sum_i weights_i z_i.
    double min_norm = 0.0;
    std::size_t iterations = 0;
    /// false when the final optimality gap is not negligible.
    bool converged = true;
};

/// Decides whether 0 lies within `tol` of conv(points) by minimizing
/// |sum_i a_i z_i| over the simplex with fully corrective Frank-Wolfe
/// (Wolfe's method, see min_norm_point).
HullCertificate zero_in_convex_hull(std::span<const double> rows, std::size_t n, std::size_t d,
                                    double tol);
HullCertificate zero_in_convex_hull(const PointList& points, double tol);

struct MinNormPoint {
    std::vector<double> point;
    std::vector<double> weights;
    std::size_t iterations = 0;
    /// max(0, -min_i <p, z_i - p>): zero at the exact minimizer.
    double gap = 0.0;
};

/// Wolfe's active-set algorithm for the minimum-norm point of conv(rows).
/// Affine minimizers are solved on difference vectors z_i - z_0, so the
/// result stays accurate when the points nearly coincide.
MinNormPoint min_norm_point(std::span<const double> rows, std::size_t n, std::size_t d);

}  // namespace polarsim
