#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "polarsim/hull.hpp"
#include "polarsim/phi.hpp"
#include "test_support.hpp"

using namespace polarsim;

TEST_CASE("zero_in_convex_hull: symmetric pair") {
    const auto cert = zero_in_convex_hull(PointList{{1.0, 0.0}, {-1.0, 0.0}}, 1e-9);
    CHECK(cert.contains_zero);
    CHECK(cert.weights[0] == doctest::Approx(0.5));
    CHECK(cert.weights[1] == doctest::Approx(0.5));
    CHECK(cert.separator.empty());
}

TEST_CASE("zero_in_convex_hull: open quadrant") {
    const auto cert = zero_in_convex_hull(PointList{{1.0, 0.0}, {0.0, 1.0}}, 1e-9);
    CHECK_FALSE(cert.contains_zero);
    REQUIRE(cert.separator.size() == 2);
    CHECK(cert.separator[0] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(cert.separator[1] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(cert.min_norm == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("zero_in_convex_hull: triangle around the origin") {
    const PointList pts{{1.0, 0.0}, {-1.0, 1.0}, {-1.0, -1.0}};
    CHECK(oracle::origin_in_hull_2d(pts));
    const auto cert = zero_in_convex_hull(pts, 1e-9);
    CHECK(cert.contains_zero);
    double sum = 0.0;
    for (double w : cert.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("zero_in_convex_hull agrees with the planar oracle on random instances") {
    RngStream rng(61, 0);
    int inside = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        PointList pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0});
        const bool expected = oracle::origin_in_hull_2d(pts);
        const auto cert = zero_in_convex_hull(pts, 1e-9);
        inside += expected;
        if (cert.contains_zero != expected) {
            // only tolerated when the origin sits within tol of the boundary
            CHECK(cert.min_norm < 1e-6);
            continue;
        }
        if (!cert.contains_zero)
            for (const auto& p : pts) CHECK(cert.separator[0] * p[0] + cert.separator[1] * p[1] < 0.0);
    }
    CHECK(inside > 100);
}

TEST_CASE("min_norm_point reaches the exact minimizer") {
    const std::vector<double> rows{1.0, 0.0, 0.0, 1.0};
    const auto mnp = min_norm_point(rows, 2, 2);
    CHECK(mnp.point[0] == doctest::Approx(0.5));
    CHECK(mnp.point[1] == doctest::Approx(0.5));
    CHECK(mnp.gap < 1e-14);
}

TEST_CASE("phi examples") {
    RngStream rng(67, 0);
    const UnitVector u = rng.haar(3);
    const auto single = phi_potential(Configuration({u}));
    CHECK(single.phi == 0.0);
    CHECK(single.center == u);

    const double theta = 1.1;
    const Configuration pair({UnitVector{1.0, 0.0}, UnitVector{std::cos(theta), std::sin(theta)}});
    const auto r = phi_potential(pair);
    CHECK(r.certified());
    CHECK(r.phi == doctest::Approx(theta / 2).epsilon(1e-12));
    CHECK(r.center[0] == doctest::Approx(std::cos(theta / 2)));
    CHECK(r.center[1] == doctest::Approx(std::sin(theta / 2)));
    CHECK(std::abs(oracle::grid_phi_circle(testing::to_rows(pair), 100000) - theta / 2) < 1e-4);

    const Configuration basis({UnitVector::basis(3, 0), UnitVector::basis(3, 1), UnitVector::basis(3, 2)});
    const auto b = phi_potential(basis);
    CHECK(b.phi == doctest::Approx(std::acos(1.0 / std::sqrt(3.0))).epsilon(1e-12));
    CHECK(b.phi == doctest::Approx(0.95532).epsilon(1e-5));
    for (std::size_t k = 0; k < 3; ++k) CHECK(b.center[k] == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(std::abs(oracle::grid_phi_sphere(testing::to_rows(basis), 20000) - b.phi) < 1e-6);
    CHECK(oracle::exact_phi_sphere(testing::to_rows(basis)) == doctest::Approx(b.phi).epsilon(1e-12));
}

TEST_CASE("phi rejects antipodal agents") {
    const Configuration x({UnitVector{1.0, 0.0, 0.0}, UnitVector{-1.0, 0.0, 0.0}});
    try {
        (void)phi_potential(x);
        FAIL("expected DegenerateInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateInput);
    }
}

TEST_CASE("phi matches grid oracles on random one-sided inputs") {
    RngStream rng(71, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.below(5);
        const Configuration c2 = testing::cap_config(rng, n, 2, 1.3);
        const auto r2 = phi_potential(c2);
        CHECK(r2.certified());
        CHECK(std::abs(r2.phi - oracle::grid_phi_circle(testing::to_rows(c2), 200000)) < 1e-4);

        const Configuration c3 = testing::cap_config(rng, n, 3, 1.3);
        const auto r3 = phi_potential(c3);
        CHECK(r3.certified());
        const double grid = oracle::grid_phi_sphere(testing::to_rows(c3), 4000);
        // a grid search only approaches the optimum from above
        CHECK(r3.phi <= grid + 1e-9);
        CHECK(r3.phi == doctest::Approx(oracle::exact_phi_sphere(testing::to_rows(c3))).epsilon(1e-10));
    }
}

TEST_CASE("phi sandwich and conic projection on random one-sided inputs") {
    RngStream rng(73, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.below(6);
        const std::size_t d = 2 + rng.below(4);
        const Configuration x = testing::cap_config(rng, n, d, 1.5);
        const auto r = phi_potential(x);
        REQUIRE(r.certified());
        const double spread = max_pairwise_angle(x);
        CHECK(r.phi <= spread + 1e-7);
        CHECK(spread <= 2.0 * r.phi + 2e-7);
        for (std::size_t i = 0; i < n; ++i) CHECK(angle(r.center.coords(), x.row(i)) <= r.phi + 1e-12);

        PointList projected;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = dot(x.row(i), r.center.coords());
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = x.row(i)[k] - c * r.center[k];
            projected.push_back(p);
        }
        CHECK(zero_in_convex_hull(projected, 1e-6).contains_zero);
    }
}

TEST_CASE("phi is uncertified when the hull contains the origin") {
    const Configuration x({UnitVector{1.0, 0.0}, project_to_sphere(std::vector<double>{-1.0, 1.0}),
                           project_to_sphere(std::vector<double>{-1.0, -1.0})});
    const auto r = phi_potential(x);
    CHECK_FALSE(r.certified());
    CHECK(r.phi > std::numbers::pi / 2);
}

TEST_CASE("mean of points with 0 in their hull shrinks by 1/n") {
    RngStream rng(79, 0);
    int accepted = 0;
    while (accepted < 2000) {
        const std::size_t n = 2 + rng.below(5);
        const std::size_t d = 2 + rng.below(3);
        PointList pts;
        std::vector<double> rows;
        for (std::size_t i = 0; i < n; ++i) {
            const UnitVector dir = rng.haar(d);
            const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = r * dir[k];
            pts.push_back(p);
        }
        if (!zero_in_convex_hull(pts, 1e-12).contains_zero) continue;
        ++accepted;
        std::vector<double> mean(d, 0.0);
        for (const auto& p : pts)
            for (std::size_t k = 0; k < d; ++k) mean[k] += p[k] / static_cast<double>(n);
        CHECK(norm(mean) <= 1.0 - 1.0 / static_cast<double>(n) + 1e-9);
    }
}

TEST_CASE("margin_direction") {
    RngStream rng(83, 0);
    const Configuration one({UnitVector{1.0, 0.0, 0.0}});
    for (int i = 0; i < 50; ++i) {
        const auto z = margin_direction(one, 0.5, kDefaultMarginTrials, rng);
        REQUIRE(z.has_value());
        CHECK(std::abs((*z)[0]) >= 0.5);
    }

    const Configuration basis({UnitVector::basis(3, 0), UnitVector::basis(3, 1), UnitVector::basis(3, 2)});
    const auto w = margin_direction(basis, 0.5, kDefaultMarginTrials, rng);
    REQUIRE(w.has_value());
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs((*w)[k]) >= 0.5);
    const double diag = 1.0 / std::sqrt(3.0);
    CHECK(diag >= 0.5);

    const Configuration ortho({UnitVector::basis(2, 0), UnitVector::basis(2, 1)});
    CHECK_FALSE(margin_direction(ortho, 0.999, kDefaultMarginTrials, rng).has_value());

    CHECK_THROWS_AS(margin_direction(one, 1.0, 10, rng), Error);
    CHECK_THROWS_AS(margin_direction(one, 0.0, 10, rng), Error);
}
