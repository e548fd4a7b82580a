#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "polarsim/dynamics.hpp"
#include "test_support.hpp"

using namespace polarsim;

namespace {

std::vector<ModelSpec> all_models(RngStream& rng, std::size_t n) {
    std::vector<double> w(n * n);
    for (double& v : w) v = rng.uniform();
    return {Hjmr{0.3}, SignedHjmr{0.2}, Party{InfluenceMatrix(n, w)}};
}

void check_close(const Configuration& a, const Configuration& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.data().size(); ++i) REQUIRE(std::abs(a.data()[i] - b.data()[i]) <= tol);
}

}  // namespace

TEST_CASE("step examples") {
    const auto e1 = UnitVector::basis(2, 0);
    const auto e2 = UnitVector::basis(2, 1);
    CHECK(step(Hjmr{0.7}, Configuration({e1}), e1) == Configuration({e1}));
    CHECK(step(SignedHjmr{0.7}, Configuration({e2}), e1) == Configuration({e2}));

    const UnitVector diag = project_to_sphere(std::vector<double>{1.0, 1.0});
    const auto out = step(Party{InfluenceMatrix::uniform(2, 1.0)}, Configuration({e1, e2}), diag);
    CHECK(out.row(0)[0] == doctest::Approx(2.0 / std::sqrt(5.0)));
    CHECK(out.row(0)[1] == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK(out.row(1)[0] == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK(out.row(1)[1] == doctest::Approx(2.0 / std::sqrt(5.0)));

    RngStream rng(101, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const UnitVector u = rng.haar(3);
        const UnitVector xi = rng.haar(3);
        const Configuration x({u, u.negated()});
        const auto y = step(Party{InfluenceMatrix::uniform(2, 1.0)}, x, xi);
        check_close(y, x, 1e-12);
    }
}

TEST_CASE("party zero update is surfaced") {
    const auto e1 = UnitVector::basis(2, 0);
    const auto e2 = UnitVector::basis(2, 1);
    const double r = 1.0 / std::sqrt(2.0);
    const Configuration x({e1, UnitVector{r, r}, UnitVector{r, -r}});
    // agent 1 is orthogonal to xi, so it agrees with neither side and is pulled
    // by -x2 - x3 = -sqrt(2) e1 scaled by 1/sqrt(2)
    const InfluenceMatrix eta(3, {0.0, r, r, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0});
    try {
        (void)step(Party{eta}, x, e2);
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
    }
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(validate_model(Hjmr{0.0}, 2), Error);
    CHECK_THROWS_AS(validate_model(SignedHjmr{-1.0}, 2), Error);
    CHECK_THROWS_AS(validate_model(Party{InfluenceMatrix::uniform(3, 1.0)}, 2), Error);
    CHECK_THROWS_AS(InfluenceMatrix(2, {1.0, -0.5, 0.0, 1.0}), Error);
    CHECK(model_name(SignedHjmr{}) == "signed-hjmr");
}

TEST_CASE("issue samplers") {
    RngStream rng(103, 0);
    for (int i = 0; i < 1000; ++i) CHECK(std::abs(norm(sample_issue(HaarUniform{4}, rng).coords()) - 1.0) < 1e-9);

    const FiniteSupport point{{UnitVector::basis(3, 0)}, {1.0}};
    for (int i = 0; i < 100; ++i) CHECK(sample_issue(point, rng) == UnitVector::basis(3, 0));

    TiltedHaar flat{3, [](std::span<const double>) { return 1.0; }, 1.0, 1.0};
    std::vector<double> mean(3, 0.0);
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const auto v = sample_issue(flat, rng);
        for (std::size_t k = 0; k < 3; ++k) mean[k] += v[k] / m;
    }
    // one Haar proposal consumed per draw means the acceptance rate is 1
    CHECK(norm(mean) < 0.02);

    TiltedHaar broken{3, [](std::span<const double>) { return 0.0; }, 1.0, 1.0};
    try {
        (void)sample_issue(broken, rng);
        FAIL("expected RejectionStall");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RejectionStall);
    }

    CHECK_THROWS_AS(validate_distribution(FiniteSupport{{UnitVector::basis(2, 0)}, {0.9}}), Error);
}

TEST_CASE("flat tilt acceptance rate is exactly one") {
    TiltedHaar flat{3, [](std::span<const double>) { return 1.0; }, 1.0, 1.0};
    RngStream a(107, 0), b(107, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto v = sample_issue(flat, a);
        const auto h = b.haar(3);
        (void)b.uniform();
        for (std::size_t k = 0; k < 3; ++k) CHECK(v[k] == doctest::Approx(h[k]).epsilon(1e-15));
        CHECK(a.counter() == b.counter());
    }
}

TEST_CASE("axial tilt bounds and empirical second moment") {
    const auto tilt = axial_tilt(UnitVector::basis(3, 2), 0.25);
    CHECK(tilt.lower == doctest::Approx(0.75));
    CHECK(tilt.upper == doctest::Approx(1.5));
    RngStream rng(109, 0);
    double m2 = 0.0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        const auto v = sample_issue(tilt, rng);
        CHECK(tilt.density(v.coords()) >= tilt.lower - 1e-12);
        CHECK(tilt.density(v.coords()) <= tilt.upper + 1e-12);
        m2 += v[2] * v[2] / m;
    }
    // E[xi_3^2] under f: 1/3 + s (d E[xi^4] - E[xi^2]) = 1/3 + 0.25 (3/5 - 1/3)
    CHECK(std::abs(m2 - (1.0 / 3.0 + 0.25 * (0.6 - 1.0 / 3.0))) < 0.005);
}

TEST_CASE("sign invariance for all models") {
    RngStream rng(113, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const Configuration x = testing::haar_config(rng, n, d);
        const UnitVector xi = rng.haar(d);
        std::vector<int> tau(n);
        for (int& s : tau) s = rng.below(2) ? 1 : -1;
        const SignPattern p(tau);
        const UnitVector xi2 = rng.below(2) ? xi : xi.negated();
        for (const auto& model : all_models(rng, n)) {
            const auto lhs = step(model, apply_signs(x, p), xi2);
            const auto rhs = apply_signs(step(model, x, xi), p);
            check_close(lhs, rhs, 1e-9);
        }
    }
}

TEST_CASE("polarized configurations stay polarized") {
    RngStream rng(127, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const UnitVector u = rng.haar(d);
        std::vector<UnitVector> agents;
        for (std::size_t i = 0; i < n; ++i) agents.push_back(rng.below(2) ? u : u.negated());
        const Configuration x(agents);
        const UnitVector xi = rng.haar(d);
        for (const auto& model : all_models(rng, n)) {
            const auto y = step(model, x, xi);
            CHECK(distance_to_polarized(y).rho < 1e-9);
            // same sign orbit: each agent keeps its sign relative to agent 0
            for (std::size_t i = 1; i < n; ++i)
                CHECK(dot(y.row(i), y.row(0)) * dot(x.row(i), x.row(0)) > 0.0);
        }
    }
}

TEST_CASE("obliviousness of HJMR and signed HJMR") {
    RngStream rng(131, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const Configuration x = testing::haar_config(rng, n, d);
        std::vector<UnitVector> other = testing::haar_config(rng, n, d).agents();
        other[0] = x.agent(0);
        const UnitVector xi = rng.haar(d);
        for (ModelSpec model : {ModelSpec{Hjmr{0.4}}, ModelSpec{SignedHjmr{0.4}}}) {
            const auto a = step(model, x, xi);
            const auto b = step(model, Configuration(other), xi);
            for (std::size_t k = 0; k < d; ++k) CHECK(a.row(0)[k] == b.row(0)[k]);
        }
    }
}

TEST_CASE("permuting agents commutes with step") {
    RngStream rng(137, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.below(5);
        const std::size_t d = 2 + rng.below(3);
        const Configuration x = testing::haar_config(rng, n, d);
        const UnitVector xi = rng.haar(d);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<UnitVector> permuted;
        for (std::size_t i = 0; i < n; ++i) permuted.push_back(x.agent(perm[i]));

        std::vector<double> w(n * n), wp(n * n);
        for (double& v : w) v = rng.uniform();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) wp[i * n + j] = w[perm[i] * n + perm[j]];

        const std::vector<std::pair<ModelSpec, ModelSpec>> models = {
            {Hjmr{0.3}, Hjmr{0.3}},
            {SignedHjmr{0.3}, SignedHjmr{0.3}},
            {Party{InfluenceMatrix(n, w)}, Party{InfluenceMatrix(n, wp)}}};
        for (const auto& [m, mp] : models) {
            const auto a = step(m, x, xi);
            const auto b = step(mp, Configuration(permuted), xi);
            // Party sums in agent order, so the permuted sum may round differently
            const double tol = std::holds_alternative<Party>(m) ? 1e-14 : 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(b.row(i)[k] - a.row(perm[i])[k]) <= tol);
        }
    }
}

TEST_CASE("HJMR is Lipschitz in the configuration") {
    RngStream rng(139, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t d = 2 + rng.below(3);
        const Configuration x = testing::haar_config(rng, 3, d);
        const UnitVector xi = rng.haar(d);
        std::vector<UnitVector> moved;
        const double delta = 1e-6 * rng.uniform() + 1e-9;
        for (std::size_t i = 0; i < 3; ++i) {
            std::vector<double> v(x.row(i).begin(), x.row(i).end());
            const UnitVector dir = rng.haar(d);
            for (std::size_t k = 0; k < d; ++k) v[k] += delta * dir[k];
            moved.push_back(project_to_sphere(v));
        }
        const Configuration y(moved);
        double in = 0.0, out = 0.0;
        const auto a = step(Hjmr{0.5}, x, xi);
        const auto b = step(Hjmr{0.5}, y, xi);
        for (std::size_t k = 0; k < x.data().size(); ++k) {
            in = std::max(in, std::abs(x.data()[k] - y.data()[k]));
            out = std::max(out, std::abs(a.data()[k] - b.data()[k]));
        }
        worst = std::max(worst, out / in);
    }
    CHECK(worst <= 100.0);
}

TEST_CASE("signed HJMR pair distance never grows on split-free steps") {
    RngStream rng(149, 0);
    for (int run = 0; run < 50; ++run) {
        Configuration x = testing::haar_config(rng, 2, 3);
        for (int t = 0; t < 400; ++t) {
            const UnitVector xi = rng.haar(3);
            const bool split = split_event(x, xi);
            const auto y = step(SignedHjmr{0.3}, x, xi);
            if (!split)
                CHECK(testing::distance(y.row(0), y.row(1)) <= testing::distance(x.row(0), x.row(1)) + 1e-9);
            x = y;
        }
    }
}

TEST_CASE("split_event") {
    RngStream rng(151, 0);
    const UnitVector u = rng.haar(3);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(split_event(Configuration({u, u}), rng.haar(3)));
    const auto e1 = UnitVector::basis(3, 0);
    CHECK(split_event(Configuration({e1, e1.negated()}), rng.haar(3)));
    // a zero inner product is its own sign class
    CHECK(split_event(Configuration({e1, UnitVector::basis(3, 1)}), UnitVector::basis(3, 1)));

    const double theta = 0.7;
    const Configuration pair({UnitVector{1.0, 0.0}, UnitVector{std::cos(theta), std::sin(theta)}});
    const int m = 1000000;
    int hits = 0;
    std::vector<double> xi(2);
    for (int i = 0; i < m; ++i) {
        sample_issue_into(HaarUniform{2}, rng, xi);
        hits += split_event(pair.data(), 2, 2, xi);
    }
    const double p = theta / std::numbers::pi;
    CHECK(std::abs(hits / static_cast<double>(m) - p) < 3.0 * std::sqrt(p * (1 - p) / m));
}

TEST_CASE("simulate basics") {
    RngStream rng(157, 0);
    const Configuration x0 = testing::haar_config(rng, 3, 3);
    RngStream a(9, 4);
    const auto s0 = simulate(SignedHjmr{0.1}, HaarUniform{3}, x0, 0, a, 1);
    REQUIRE(s0.entries.size() == 1);
    CHECK(s0.entries[0].t == 0);
    CHECK(s0.terminal_config == x0);

    RngStream r1(9, 4), r2(9, 4);
    const auto s1 = simulate(SignedHjmr{0.1}, HaarUniform{3}, x0, 1000, r1, 7);
    const auto s2 = simulate(SignedHjmr{0.1}, HaarUniform{3}, x0, 1000, r2, 7);
    REQUIRE(s1.entries.size() == s2.entries.size());
    CHECK(s1.entries.back().t == 1000);
    CHECK(s1.entries[1].t == 7);
    for (std::size_t k = 0; k < s1.entries.size(); ++k) {
        CHECK(s1.entries[k].rho == s2.entries[k].rho);
        CHECK(s1.entries[k].phi == s2.entries[k].phi);
        CHECK(s1.entries[k].split == s2.entries[k].split);
    }
    CHECK(s1.terminal_config == s2.terminal_config);

    const UnitVector u = rng.haar(3);
    const Configuration polar({u, u.negated(), u});
    for (const auto& model : all_models(rng, 3)) {
        RngStream r(11, 0);
        const auto s = simulate(model, HaarUniform{3}, polar, 500, r, 1);
        for (const auto& e : s.entries) CHECK(e.rho < 1e-9);
    }

    CHECK(default_record_every(10000) == 1);
    CHECK(default_record_every(20000) == 2);
    CHECK(default_record_every(100001) == 11);
}

TEST_CASE("simulate reports the failing step") {
    const double r = 1.0 / std::sqrt(2.0);
    const Configuration x({UnitVector::basis(2, 0), UnitVector{r, r}, UnitVector{r, -r}});
    const InfluenceMatrix eta(3, {0.0, r, r, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0});
    const FiniteSupport always{{UnitVector::basis(2, 1)}, {1.0}};
    RngStream rng(1, 0);
    try {
        (void)simulate(Party{eta}, always, x, 5, rng, 1);
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
        CHECK(std::string(e.what()).find("at step 1") != std::string::npos);
    }
}

TEST_CASE("orthonormal closed form") {
    const UnitVector v0{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    const std::vector<std::uint64_t> zero{0, 0};
    const auto same = orthonormal_closed_form(v0, zero, 0.5);
    for (std::size_t k = 0; k < 2; ++k) CHECK(same[k] == doctest::Approx(v0[k]).epsilon(1e-15));
    const std::vector<std::uint64_t> one{1, 0};
    const auto z = orthonormal_closed_form(v0, one, 1.0);
    CHECK(z[0] == doctest::Approx(2.0 / std::sqrt(5.0)));
    CHECK(z[1] == doctest::Approx(1.0 / std::sqrt(5.0)));

    // huge counts stay finite
    const std::vector<std::uint64_t> big{1000000, 999990};
    const auto w = orthonormal_closed_form(v0, big, 1.0);
    CHECK(std::isfinite(w[0]));
    CHECK(w[1] > 0.0);

    const UnitVector e2 = UnitVector::basis(2, 1);
    const std::vector<std::uint64_t> lead{5000, 0};
    CHECK_THROWS_AS(orthonormal_closed_form(e2, lead, 1.0), Error);

    RngStream rng(163, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + rng.below(4);
        const UnitVector start = rng.haar(d);
        const double eta = 0.05 + 0.5 * rng.uniform();
        std::vector<std::uint64_t> counts(d, 0);
        Configuration x({start});
        const auto basis = orthonormal_basis(d);
        for (int t = 0; t < 1000; ++t) {
            const auto xi = sample_issue(basis, rng);
            for (std::size_t k = 0; k < d; ++k)
                if (xi[k] == 1.0) ++counts[k];
            x = step(Hjmr{eta}, x, xi);
        }
        const auto closed = orthonormal_closed_form(start, counts, eta);
        for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(closed[k] - x.row(0)[k]) <= 1e-10);
    }
}

TEST_CASE("irreducibility") {
    CHECK(is_irreducible(InfluenceGraph::from(InfluenceMatrix::uniform(4, 1.0))));
    CHECK(is_irreducible(InfluenceGraph::from(InfluenceMatrix::directed_cycle(5, 0.3, 0.0))));
    CHECK(is_irreducible(InfluenceGraph::from(InfluenceMatrix::directed_cycle(1, 0.0, 1.0))));
    std::vector<double> blocks(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i / 2 == j / 2) blocks[i * 4 + j] = 1.0;
    CHECK_FALSE(is_irreducible(InfluenceGraph::from(InfluenceMatrix(4, blocks))));
    // one-way chain 0 <- 1 <- 2 reaches only downstream
    std::vector<double> chain(9, 0.0);
    chain[0 * 3 + 1] = 1.0;
    chain[1 * 3 + 2] = 1.0;
    CHECK_FALSE(is_irreducible(InfluenceGraph::from(InfluenceMatrix(3, chain))));
}
