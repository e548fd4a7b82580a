// Randomized property checks for the geometric lemmas, bundled as a suite.
// Each check draws from its own RNG stream so checks can be reordered freely.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "polarsim/diagnostics.hpp"
#include "polarsim/dynamics.hpp"
#include "polarsim/harness/run.hpp"
#include "polarsim/harness/suites.hpp"
#include "polarsim/hull.hpp"
#include "polarsim/phi.hpp"

namespace polarsim::harness {

namespace {

constexpr std::uint64_t kStreamBase = std::uint64_t{3} << 40;
constexpr double kLemmaBudgetSeconds = 300.0;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

/// Worst observed value against a limit; `trials` instances were checked.
struct Tally {
    std::size_t trials = 0;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t failures = 0;

    void add(double value, bool ok) {
        ++trials;
        worst = std::max(worst, value);
        failures += !ok;
    }
};

struct Check {
    CriterionLine line;
    std::size_t trials = 0;
    double worst = 0.0;
};

Check make(std::string id, std::string claim, const Tally& t, const std::string& detail) {
    const bool ok = t.failures == 0 && t.trials > 0;
    return {{std::move(id), std::move(claim), ok,
             std::to_string(t.trials - t.failures) + "/" + std::to_string(t.trials) + " instances hold; " + detail,
             false},
            t.trials,
            t.worst};
}

Configuration haar_config(RngStream& rng, std::size_t n, std::size_t d) {
    std::vector<UnitVector> agents;
    for (std::size_t i = 0; i < n; ++i) agents.push_back(rng.haar(d));
    return Configuration(agents);
}

/// Agents within angle `radius` < pi/2 of a random axis.
Configuration cap_config(RngStream& rng, std::size_t n, std::size_t d, double radius) {
    const UnitVector axis = rng.haar(d);
    std::vector<UnitVector> agents;
    while (agents.size() < n) {
        UnitVector u = rng.haar(d);
        if (angle(u, axis) <= radius) agents.push_back(std::move(u));
    }
    return Configuration(agents);
}

InfluenceMatrix random_influence(RngStream& rng, std::size_t n, double density) {
    std::vector<double> w(n * n, 0.0);
    for (double& v : w)
        if (rng.uniform() < density) v = 0.1 + rng.uniform();
    return InfluenceMatrix(n, w);
}

InfluenceMatrix random_irreducible(RngStream& rng, std::size_t n) {
    for (;;) {
        InfluenceMatrix m = random_influence(rng, n, 0.5);
        if (is_irreducible(InfluenceGraph::from(m))) return m;
    }
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

double max_abs_diff(const Configuration& a, const Configuration& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    return worst;
}

Check normalization_contraction(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 0);
    Tally t;
    for (double eps : {0.0, 0.1, 1.0}) {
        std::size_t accepted = 0;
        while (accepted < 10000) {
            const std::size_t d = 2 + rng.below(4);
            const UnitVector x = rng.haar(d);
            const UnitVector y = rng.haar(d);
            const UnitVector dir = rng.haar(d);
            const double len = 4.0 * rng.uniform();
            std::vector<double> xz(d), yz(d), diff(d);
            for (std::size_t k = 0; k < d; ++k) {
                xz[k] = x[k] + len * dir[k];
                yz[k] = y[k] + len * dir[k];
                diff[k] = x[k] - y[k];
            }
            if (norm(xz) < 1.0 + eps || norm(yz) < 1.0 + eps) continue;
            ++accepted;
            const double lhs = distance(project_to_sphere(xz).coords(), project_to_sphere(yz).coords());
            const double rhs = norm(diff) / (1.0 + eps);
            t.add(lhs - rhs, lhs <= rhs + 1e-9);
        }
    }
    return make("normalization-contraction",
                "Normalizing points of norm >= 1+eps shrinks distances by 1/(1+eps), eps in {0, 0.1, 1}", t,
                fmt("max excess %.3g (tol 1e-9)", t.worst));
}

Check mean_shrink(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 1);
    Tally t;
    while (t.trials < 10000) {
        const std::size_t n = 2 + rng.below(5);
        const std::size_t d = 2 + rng.below(3);
        PointList pts;
        for (std::size_t i = 0; i < n; ++i) {
            const UnitVector dir = rng.haar(d);
            const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = r * dir[k];
            pts.push_back(std::move(p));
        }
        if (!zero_in_convex_hull(pts, 1e-12).contains_zero) continue;
        std::vector<double> mean(d, 0.0);
        for (const auto& p : pts)
            for (std::size_t k = 0; k < d; ++k) mean[k] += p[k] / static_cast<double>(n);
        const double excess = norm(mean) - (1.0 - 1.0 / static_cast<double>(n));
        t.add(excess, excess <= 1e-9);
    }
    return make("mean-shrink", "Points in the unit ball with 0 in their hull have mean norm <= 1 - 1/n", t,
                fmt("max excess %.3g (tol 1e-9)", t.worst));
}

/// Conic projection and the Phi sandwich share their random configurations.
std::pair<Check, Check> conic_and_sandwich(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 2);
    Tally conic;
    Tally sandwich;
    std::size_t uncertified = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 2 + rng.below(6);
        const std::size_t d = 2 + rng.below(4);
        const Configuration x = cap_config(rng, n, d, 1.5);
        const PhiResult r = phi_potential(x);
        uncertified += !r.certified();
        const double spread = max_pairwise_angle(x);
        const double excess = std::max(r.phi - spread, spread - 2.0 * r.phi);
        sandwich.add(excess, r.certified() && excess <= 1e-7);

        PointList projected;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = dot(x.row(i), r.center.coords());
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = x.row(i)[k] - c * r.center[k];
            projected.push_back(std::move(p));
        }
        const HullCertificate cert = zero_in_convex_hull(projected, 1e-6);
        conic.add(cert.min_norm, cert.contains_zero);
    }
    return {make("conic-projection", "Projecting agents orthogonally to the Phi center puts 0 in their hull", conic,
                 fmt("max hull distance %.3g (tol 1e-6)", conic.worst)),
            make("phi-sandwich", "Phi <= max pairwise angle <= 2 Phi on one-sided configurations", sandwich,
                 fmt("max violation %.3g (tol 1e-7); %.0f uncertified solves", sandwich.worst,
                     static_cast<double>(uncertified)))};
}

Check stochastic_matrix(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 3);
    Tally t;
    double min_positive = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const InfluenceMatrix eta = random_influence(rng, n, 0.4);
        const Configuration x0 = cap_config(rng, n, d, 1.2);
        Configuration x = x0;
        std::vector<UnitVector> issues;
        while (issues.size() < n) {
            UnitVector xi = rng.haar(d);
            if (split_event(x, xi)) continue;
            x = step(Party{eta}, x, xi);
            issues.push_back(std::move(xi));
        }
        const TransferMatrix m = split_free_transfer_matrix(eta, x0, issues);
        const std::vector<bool> reach = reachable_within(InfluenceGraph::from(eta), n);
        double worst_row = 0.0;
        bool pattern_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                total += m(i, j);
                pattern_ok = pattern_ok && (m(i, j) > 0.0) == reach[i * n + j];
                if (m(i, j) > 0.0) min_positive = std::min(min_positive, m(i, j));
            }
            worst_row = std::max(worst_row, std::abs(total - 1.0));
        }
        t.add(worst_row, pattern_ok && worst_row <= 1e-9);
    }
    return make("stochastic-matrix",
                "n split-free party steps act through a row-stochastic matrix, positive exactly on reachable pairs", t,
                fmt("max |row sum - 1| %.3g (tol 1e-9); smallest positive entry %.3g", t.worst, min_positive));
}

/// Party with forced split-free issues from margin starts.
std::vector<Check> phi_decay(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 4);
    constexpr double kLambda = 0.2;
    Tally per_step;
    Tally per_block;
    Tally rate;
    std::size_t runs = 0;
    while (runs < 40) {
        const std::size_t n = 3 + rng.below(3);
        const std::size_t d = 3;
        const InfluenceMatrix eta = random_irreducible(rng, n);
        const Configuration raw = haar_config(rng, n, d);
        const auto z = margin_direction(raw, kLambda, kDefaultMarginTrials, rng);
        if (!z) continue;
        ++runs;
        // flip every agent onto the positive side of z
        std::vector<int> signs(n);
        for (std::size_t i = 0; i < n; ++i) signs[i] = dot(raw.row(i), z->coords()) > 0.0 ? 1 : -1;
        Configuration x = apply_signs(raw, SignPattern(signs));

        std::vector<double> phi{phi_potential(x).phi};
        for (std::size_t t = 0; t < 50 * n; ++t) {
            UnitVector xi = rng.haar(d);
            while (split_event(x, xi)) xi = rng.haar(d);
            x = step(Party{eta}, x, xi);
            phi.push_back(phi_potential(x).phi);
            const double rise = phi.back() - phi[phi.size() - 2];
            per_step.add(rise, rise <= 1e-7);
        }
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k * n < phi.size(); ++k) {
            if (k > 0) {
                const double rise = phi[k * n] - phi[(k - 1) * n];
                per_block.add(rise, rise <= 1e-7);
            }
            if (phi[k * n] > 1e-12) pts.emplace_back(static_cast<double>(k * n), phi[k * n]);
        }
        // per-step factor; fewer than 3 points means Phi collapsed almost at once
        const double factor = pts.size() >= 3 ? decay_rate_fit(pts, DecayModel::Geometric).rate : 0.0;
        rate.add(factor, factor <= 0.999);
    }
    return {make("phi-step-monotone", "Phi never increases on a split-free party step", per_step,
                 fmt("max rise %.3g (tol 1e-7)", per_step.worst)),
            make("phi-block-monotone", "Phi never increases across each block of n split-free party steps", per_block,
                 fmt("max rise %.3g (tol 1e-7)", per_block.worst)),
            make("phi-geometric-decay", "Phi decays geometrically under split-free party steps", rate,
                 fmt("worst fitted per-step factor %.6f over 50n steps (limit 0.999)", rate.worst))};
}

std::vector<ModelSpec> all_models(RngStream& rng, std::size_t n) {
    return {Hjmr{0.05 + rng.uniform()}, SignedHjmr{0.05 + rng.uniform()}, Party{random_influence(rng, n, 0.6)}};
}

Check sign_invariance(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 5);
    Tally t;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const Configuration x = haar_config(rng, n, d);
        const UnitVector xi = rng.haar(d);
        std::vector<int> tau(n);
        for (int& s : tau) s = rng.below(2) ? 1 : -1;
        const SignPattern p(tau);
        const UnitVector xi2 = rng.below(2) ? xi : xi.negated();
        double worst = 0.0;
        for (const auto& model : all_models(rng, n))
            worst = std::max(worst, max_abs_diff(step(model, apply_signs(x, p), xi2), apply_signs(step(model, x, xi), p)));
        t.add(worst, worst <= 1e-9);
    }
    return make("sign-invariance", "Flipping agents or the issue commutes with every update rule", t,
                fmt("max componentwise difference %.3g (tol 1e-9)", t.worst));
}

Check polarized_invariance(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 6);
    Tally t;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        const std::size_t d = 2 + rng.below(3);
        const UnitVector u = rng.haar(d);
        std::vector<UnitVector> agents;
        for (std::size_t i = 0; i < n; ++i) agents.push_back(rng.below(2) ? u : u.negated());
        const Configuration x(agents);
        const UnitVector xi = rng.haar(d);
        double worst = 0.0;
        for (const auto& model : all_models(rng, n)) worst = std::max(worst, distance_to_polarized(step(model, x, xi)).rho);
        t.add(worst, worst <= 1e-9);
    }
    return make("polarized-invariance", "Polarized configurations stay polarized under every update rule", t,
                fmt("max rho after one step %.3g (tol 1e-9)", t.worst));
}

std::vector<Check> split_bound(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 7);
    constexpr std::size_t kDraws = 1000000;
    const double inv_pi = 1.0 / std::numbers::pi;
    Tally planar;
    Tally higher;
    std::string planar_detail;
    std::string higher_detail;
    for (std::size_t d : {2, 3, 5}) {
        for (double theta : {0.01, 0.05, 0.1, 0.3, 0.5}) {
            std::vector<double> rows(2 * d, 0.0);
            rows[0] = 1.0;
            rows[d] = std::cos(theta);
            rows[d + 1] = std::sin(theta);
            std::size_t splits = 0;
            for (std::size_t s = 0; s < kDraws; ++s) {
                const UnitVector v = rng.haar(d);
                splits += split_event(rows, 2, d, v.coords());
            }
            const double ratio = static_cast<double>(splits) / static_cast<double>(kDraws) / theta;
            const std::string item = fmt("d=%.0f theta=%.2f: %.4f; ", static_cast<double>(d), theta, ratio);
            if (d == 2) {
                planar.add(std::abs(ratio - inv_pi), std::abs(ratio - inv_pi) <= 0.05);
                planar_detail += item;
            } else {
                higher.add(ratio, ratio <= inv_pi + 0.05);
                higher_detail += item;
            }
        }
    }
    return {make("split-linear-d2", "In the plane the split probability for agents at angle theta is theta/pi", planar,
                 "frequency/theta within 1/pi +- 0.05: " + planar_detail.substr(0, planar_detail.size() - 2)),
            make("split-linear-d3-d5", "In d=3 and d=5 split probability / theta stays below one constant", higher,
                 fmt("frequency/theta <= 1/pi + 0.05 = %.4f: ", inv_pi + 0.05) +
                     higher_detail.substr(0, higher_detail.size() - 2))};
}

Check good_event(std::uint64_t seed) {
    RngStream rng(seed, kStreamBase + 8);
    // |<xi, z>| is uniform on [0, 1] in d=3, so P(|<xi, z>| < 1/8) = 1/8
    constexpr double kGamma = 0.125;
    Tally t;
    double lowest = 1.0;
    while (t.trials < 100) {
        const UnitVector a = rng.haar(3);
        const UnitVector b = rng.haar(3);
        if (dot(a.coords(), b.coords()) <= 0.0) continue;
        std::size_t good = 0;
        for (int s = 0; s < 10000; ++s) {
            const UnitVector xi = rng.haar(3);
            const double p = dot(a.coords(), xi.coords());
            const double q = dot(b.coords(), xi.coords());
            good += sgn(p) == sgn(q) && std::abs(p) >= kGamma && std::abs(q) >= kGamma;
        }
        const double freq = static_cast<double>(good) / 10000.0;
        lowest = std::min(lowest, freq);
        t.add(-freq, freq >= 0.23);
    }
    return make("good-event",
                "Acute pairs in d=3 see a same-sign issue with both inner products >= 1/8 with probability >= 1/4", t,
                fmt("lowest frequency %.4f over 100 pairs x 1e4 issues (limit 0.23)", lowest));
}

std::string csv(const std::vector<Check>& checks) {
    std::string out = "check,trials,worst,passed\n";
    for (const auto& c : checks)
        out += c.line.id + "," + std::to_string(c.trials) + "," + format_double(c.worst) + "," +
               (c.line.passed ? "true" : "false") + "\n";
    return out;
}

}  // namespace

SuiteReport run_lemma_checks(const SuiteOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t seed = options.seed;
    std::vector<Check> checks;
    checks.push_back(normalization_contraction(seed));
    checks.push_back(mean_shrink(seed));
    auto [conic, sandwich] = conic_and_sandwich(seed);
    checks.push_back(std::move(conic));
    checks.push_back(std::move(sandwich));
    checks.push_back(stochastic_matrix(seed));
    for (auto& c : phi_decay(seed)) checks.push_back(std::move(c));
    checks.push_back(sign_invariance(seed));
    checks.push_back(polarized_invariance(seed));
    for (auto& c : split_bound(seed)) checks.push_back(std::move(c));
    checks.push_back(good_event(seed));

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    SuiteReport rep{"lemma-checks", {}, seconds};
    for (const auto& c : checks) rep.lines.push_back(c.line);
    rep.lines.push_back({"runtime", "All lemma checks finish within five minutes", seconds < kLemmaBudgetSeconds,
                         fmt("%.1f s (limit %.0f s)", seconds, kLemmaBudgetSeconds), false});
    if (options.out) write_text_file(*options.out / "lemma-checks" / "lemma_checks.csv", csv(checks));
    return rep;
}

}  // namespace polarsim::harness
