#include "polarsim/hull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarsim/error.hpp"

namespace polarsim {

namespace {

double dot_raw(const double* a, const double* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += a[k] * b[k];
    return acc;
}

}  // namespace

HullCertificate zero_in_convex_hull(std::span<const double> rows, std::size_t n, std::size_t d,
                                    double tol) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "zero_in_convex_hull needs a point");
    if (rows.size() != n * d) throw Error(ErrorCode::DimensionMismatch, "point buffer size");

    // Fully corrective Frank-Wolfe: each vertex enters by coordinate selection
    // and the iterate is then re-optimized over the active face.
    MinNormPoint mnp = min_norm_point(rows, n, d);
    HullCertificate cert;
    cert.weights = std::move(mnp.weights);
    cert.iterations = mnp.iterations;
    const double pn = std::sqrt(dot_raw(mnp.point.data(), mnp.point.data(), d));
    cert.min_norm = pn;
    if (pn < tol) {
        cert.contains_zero = true;
        return cert;
    }
    cert.converged = mnp.gap <= 1e-12 * std::max(1.0, pn * pn);
    cert.separator.resize(d);
    for (std::size_t k = 0; k < d; ++k) cert.separator[k] = -mnp.point[k] / pn;
    return cert;
}

HullCertificate zero_in_convex_hull(const PointList& points, double tol) {
    if (points.empty()) throw Error(ErrorCode::InvalidArgument, "zero_in_convex_hull needs a point");
    const std::size_t d = points.front().size();
    std::vector<double> rows;
    rows.reserve(points.size() * d);
    for (const auto& p : points) {
        if (p.size() != d) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");
        rows.insert(rows.end(), p.begin(), p.end());
    }
    return zero_in_convex_hull(rows, points.size(), d, tol);
}

MinNormPoint min_norm_point(std::span<const double> rows, std::size_t n, std::size_t d) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "min_norm_point needs a point");
    if (rows.size() != n * d) throw Error(ErrorCode::DimensionMismatch, "point buffer size");

    auto point = [&](std::size_t i) { return &rows[i * d]; };

    std::vector<std::size_t> active{0};
    std::vector<double> lambda{1.0};
    MinNormPoint out;
    out.weights.assign(n, 0.0);

    // p - z_j, accumulated from differences of the inputs
    auto offset_from = [&](std::size_t j, std::vector<double>& diff) {
        std::fill(diff.begin(), diff.end(), 0.0);
        for (std::size_t a = 0; a < active.size(); ++a) {
            const double* z = point(active[a]);
            for (std::size_t k = 0; k < d; ++k) diff[k] += lambda[a] * (z[k] - point(j)[k]);
        }
    };
    auto current = [&]() {
        std::vector<double> p(d, 0.0);
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t k = 0; k < d; ++k) p[k] += lambda[a] * point(active[a])[k];
        return p;
    };

    std::vector<double> diff(d);
    const std::size_t max_major = 50 * (n + d) + 100;
    std::size_t major = 0;
    for (; major < max_major; ++major) {
        const std::vector<double> p = current();

        // most violated optimality condition <p, z_j - p> >= 0
        std::size_t entering = n;
        double worst = 0.0;
        double scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            offset_from(j, diff);  // p - z_j
            const double dsq = dot_raw(diff.data(), diff.data(), d);
            scale = std::max(scale, dsq);
            const double viol = dot_raw(p.data(), diff.data(), d);  // -<p, z_j - p>
            if (viol > worst) {
                worst = viol;
                entering = j;
            }
        }
        if (entering == n || worst <= 1e-13 * scale) break;
        if (std::find(active.begin(), active.end(), entering) != active.end()) break;
        active.push_back(entering);
        lambda.push_back(0.0);

        for (std::size_t minor = 0; minor <= active.size() + 1; ++minor) {
            // affine minimizer: min |z_a0 + sum_k beta_k (z_ak - z_a0)|
            const std::size_t m = active.size();
            std::vector<double> alpha(m, 0.0);
            if (m == 1) {
                alpha[0] = 1.0;
            } else {
                Eigen::MatrixXd diffs(d, m - 1);
                Eigen::VectorXd base(d);
                const double* z0 = point(active[0]);
                for (std::size_t k = 0; k < d; ++k) base(static_cast<Eigen::Index>(k)) = -z0[k];
                for (std::size_t c = 1; c < m; ++c)
                    for (std::size_t k = 0; k < d; ++k)
                        diffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c - 1)) =
                            point(active[c])[k] - z0[k];
                const Eigen::VectorXd beta = diffs.colPivHouseholderQr().solve(base);
                double rest = 1.0;
                for (std::size_t c = 1; c < m; ++c) {
                    alpha[c] = beta(static_cast<Eigen::Index>(c - 1));
                    rest -= alpha[c];
                }
                alpha[0] = rest;
            }

            constexpr double kEps = 1e-14;
            if (std::all_of(alpha.begin(), alpha.end(), [](double a) { return a > kEps; })) {
                lambda = alpha;
                break;
            }
            double theta = 1.0;
            for (std::size_t a = 0; a < m; ++a)
                if (alpha[a] <= kEps && lambda[a] - alpha[a] > 0.0)
                    theta = std::min(theta, lambda[a] / (lambda[a] - alpha[a]));
            std::vector<std::size_t> keep_idx;
            std::vector<double> keep_lambda;
            for (std::size_t a = 0; a < m; ++a) {
                const double v = theta * alpha[a] + (1.0 - theta) * lambda[a];
                if (v > kEps) {
                    keep_idx.push_back(active[a]);
                    keep_lambda.push_back(v);
                }
            }
            if (keep_idx.empty()) {
                // numerical corner: keep the entering point alone
                keep_idx = {entering};
                keep_lambda = {1.0};
            }
            double total = 0.0;
            for (double v : keep_lambda) total += v;
            for (double& v : keep_lambda) v /= total;
            active = std::move(keep_idx);
            lambda = std::move(keep_lambda);
        }
    }

    out.iterations = major;
    out.point = current();
    for (std::size_t a = 0; a < active.size(); ++a) out.weights[active[a]] = lambda[a];
    double gap = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        offset_from(j, diff);
        gap = std::max(gap, dot_raw(out.point.data(), diff.data(), d));
    }
    out.gap = gap;
    return out;
}

}  // namespace polarsim
