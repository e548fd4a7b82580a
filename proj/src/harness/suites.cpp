#include "polarsim/harness/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "polarsim/diagnostics.hpp"
#include "polarsim/harness/run.hpp"

namespace polarsim::harness {

bool SuiteReport::passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const CriterionLine& l) { return l.informational || l.passed; });
}

const CriterionLine* SuiteReport::find(const std::string& id) const {
    for (const auto& l : lines)
        if (l.id == id) return &l;
    return nullptr;
}

std::string SuiteReport::render() const {
    std::ostringstream out;
    out << "suite " << suite << "\n";
    for (const auto& l : lines) {
        const char* tag = l.informational ? "INFO" : (l.passed ? "PASS" : "FAIL");
        out << "  [" << tag << "] " << l.id << ": " << l.claim << "\n         " << l.detail << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", seconds);
    out << "suite " << suite << ": " << (passed() ? "PASS" : "FAIL") << " (" << buf << " s)\n";
    return out.str();
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"signed-hjmr", "party", "ortho-weak-not-strong",
                                                   "lemma-checks", "consensus-remark"};
    return names;
}

bool is_suite(const std::string& name) {
    const auto& names = suite_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
    return s;
}

ExperimentConfig base_config(const std::string& name, const SuiteOptions& o) {
    ExperimentConfig c;
    c.name = name;
    c.master_seed = o.seed;
    c.outputs = o.out ? (*o.out / name).string() : name;
    return c;
}

RunOptions base_run_options(const SuiteOptions& o) {
    RunOptions r;
    r.threads = o.threads;
    r.write_files = o.out.has_value();
    return r;
}

CriterionLine converged_line(const std::string& id, const std::string& claim, const RunResult& r,
                             double threshold) {
    const auto& a = r.aggregates.front();
    const auto conv = static_cast<std::size_t>(std::llround(a.converged.point * static_cast<double>(r.replicas.size())));
    CriterionLine line{id, claim, a.converged.point >= threshold, "", false};
    line.detail = std::to_string(conv) + "/" + std::to_string(r.replicas.size()) +
                  fmt(" Converged at eps=%.3g (%.1f%%, 95%% CI [%.3f, %.3f])", a.epsilon, 100.0 * a.converged.point,
                      a.converged.lower, a.converged.upper) +
                  fmt("; threshold %.0f%%", 100.0 * threshold);
    return line;
}

CriterionLine implication_line(const std::vector<const RunResult*>& runs) {
    bool ok = true;
    std::string detail;
    for (const RunResult* r : runs)
        for (const auto& a : r->aggregates) {
            ok = ok && a.implication_holds;
            detail += r->config.name + fmt(": converged %.4f <= 1 - far %.4f; ", a.converged.point, 1.0 - a.far_at_end.point);
        }
    return {"strong-implies-weak", "Converged fraction never exceeds the final near-P fraction", ok, trimmed(detail),
            false};
}

std::vector<std::vector<double>> to_rows(const InfluenceMatrix& m) {
    std::vector<std::vector<double>> rows(m.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) rows[i][j] = m(i, j);
    return rows;
}

// ---------------------------------------------------------------- signed-hjmr

SuiteReport signed_hjmr_suite(const SuiteOptions& o) {
    SuiteReport rep{"signed-hjmr", {}, 0.0};
    ExperimentConfig c = base_config("signed-hjmr-haar", o);
    c.model = {ModelKind::SignedHjmr, 0.1, {}};
    c.distribution.kind = DistributionKind::Haar;
    c.n = 4;
    c.d = 3;
    c.init.kind = InitKind::HaarRandom;
    c.steps = 20000;
    c.replicas = 500;
    c.series_stride = 10;
    const RunResult haar = run(c, base_run_options(o));
    rep.lines.push_back(converged_line("haar", "Signed HJMR strongly polarizes from Haar starts under Haar issues",
                                       haar, 0.99));

    ExperimentConfig t = c;
    t.name = "signed-hjmr-tilted";
    t.outputs = o.out ? (*o.out / t.name).string() : t.name;
    t.distribution.kind = DistributionKind::AxialTilt;
    t.distribution.axis = {0.0, 0.0, 1.0};
    t.distribution.strength = 0.25;  // density in [0.75, 1.5]
    const RunResult tilted = run(t, base_run_options(o));
    rep.lines.push_back(converged_line(
        "tilted", "Signed HJMR strongly polarizes under an issue law with density in [0.5, 1.5] w.r.t. Haar", tilted,
        0.99));
    rep.lines.push_back(implication_line({&haar, &tilted}));
    return rep;
}

// ---------------------------------------------------------------------- party

SuiteReport party_suite(const SuiteOptions& o) {
    SuiteReport rep{"party", {}, 0.0};
    const InfluenceMatrix cycle = InfluenceMatrix::directed_cycle(4, 0.3, 1.0);
    ExperimentConfig c = base_config("party-cycle", o);
    c.model = {ModelKind::Party, 0.1, to_rows(cycle)};
    c.n = 4;
    c.d = 3;
    c.steps = 20000;
    c.replicas = 300;
    c.series_stride = 10;
    const bool irreducible = is_irreducible(InfluenceGraph::from(cycle));
    rep.lines.push_back({"irreducible", "The directed 4-cycle with self weights is irreducible", irreducible,
                         irreducible ? "is_irreducible = true" : "is_irreducible = false", false});
    const RunResult main = run(c, base_run_options(o));
    rep.lines.push_back(converged_line("cycle", "Party model with an irreducible influence graph strongly polarizes",
                                       main, 0.97));

    std::vector<double> w(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        w[i * 4 + i] = 1.0;
        w[i * 4 + (i ^ 1u)] = 0.3;  // pairs {0,1} and {2,3}
    }
    const InfluenceMatrix split(4, w);
    ExperimentConfig nc = c;
    nc.name = "party-disconnected";
    nc.outputs = o.out ? (*o.out / nc.name).string() : nc.name;
    nc.model.influence = to_rows(split);
    const bool reducible = !is_irreducible(InfluenceGraph::from(split));
    const RunResult control = run(nc, base_run_options(o));
    const auto& a = control.aggregates.front();
    rep.lines.push_back({"disconnected-control",
                         "Two disconnected 2-cycles (reducible; no claim is made, reported only)", true,
                         std::string(reducible ? "is_irreducible = false; " : "is_irreducible = true (unexpected); ") +
                             fmt("%.1f%% Converged at eps=%.3g", 100.0 * a.converged.point, a.epsilon),
                         true});
    rep.lines.push_back(implication_line({&main, &control}));
    return rep;
}

// ------------------------------------------------------ ortho-weak-not-strong

constexpr double kOrthoEta = 0.2;
constexpr double kWeakEpsilon = 0.1;
const std::vector<std::size_t> kWeakTimes = {100, 316, 1000, 3162, 10000};

ExperimentConfig ortho_config(const std::string& name, std::size_t steps, const SuiteOptions& o) {
    ExperimentConfig c = base_config(name, o);
    c.model = {ModelKind::Hjmr, kOrthoEta, {}};
    c.distribution.kind = DistributionKind::OrthonormalBasis;
    c.n = 2;
    c.d = 3;
    c.init.kind = InitKind::EqualSupportRandom;
    c.steps = steps;
    c.replicas = 2000;
    c.record_phi = false;
    c.series_stride = 100;
    return c;
}

/// stats[0] = delta_0, stats[1] = 1 if rho > delta_0 / 2 at some recorded t >= T/2
void recurrence_stats(const Configuration& x0, const MetricsSeries& s, ReplicaRecord& rec, std::size_t steps) {
    const double delta0 = ortho_separation_floor(x0, kOrthoEta);
    bool recurred = false;
    for (const auto& e : s.entries)
        if (2 * e.t >= steps && e.rho > delta0 / 2.0) recurred = true;
    rec.stats = {delta0, recurred ? 1.0 : 0.0};
}

CriterionLine recurrence_line(const std::string& id, const RunResult& r) {
    std::size_t hits = 0;
    for (const auto& rec : r.replicas) hits += rec.stats[1] > 0.5;
    const double frac = static_cast<double>(hits) / static_cast<double>(r.replicas.size());
    const auto ci = wilson_interval(hits, r.replicas.size());
    return {id,
            "Orthonormal HJMR does not strongly polarize: rho returns above delta_0/2 late in the run (T=" +
                std::to_string(r.config.steps) + ")",
            frac >= 0.5,
            std::to_string(hits) + "/" + std::to_string(r.replicas.size()) +
                fmt(" replicas recur in the second half (%.1f%%, 95%% CI [%.3f, %.3f]); threshold 50%%", 100.0 * frac,
                    ci.lower, ci.upper),
            false};
}

std::vector<CriterionLine> closed_form_lines(const SuiteOptions& o) {
    constexpr std::uint64_t kStreamBase = std::uint64_t{1} << 40;
    double worst_iter = 0.0;
    double worst_perm = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        RngStream rng(o.seed, kStreamBase + trial);
        const std::size_t d = 2 + rng.below(4);
        const UnitVector v0 = rng.haar(d);
        const double eta = 0.05 + 0.45 * rng.uniform();
        const FiniteSupport basis = orthonormal_basis(d);
        std::vector<UnitVector> issues;
        std::vector<std::uint64_t> counts(d, 0);
        for (int t = 0; t < 1000; ++t) {
            issues.push_back(sample_issue(basis, rng));
            for (std::size_t k = 0; k < d; ++k)
                if (issues.back()[k] == 1.0) ++counts[k];
        }
        Configuration x({v0});
        for (const auto& xi : issues) x = step(Hjmr{eta}, x, xi);
        std::shuffle(issues.begin(), issues.end(), rng);
        Configuration y({v0});
        for (const auto& xi : issues) y = step(Hjmr{eta}, y, xi);
        const UnitVector closed = orthonormal_closed_form(v0, counts, eta);
        for (std::size_t k = 0; k < d; ++k) {
            worst_iter = std::max(worst_iter, std::abs(closed[k] - x.row(0)[k]));
            worst_perm = std::max(worst_perm, std::abs(y.row(0)[k] - x.row(0)[k]));
        }
    }
    return {{"closed-form", "Orthonormal HJMR state depends only on per-coordinate issue counts (closed form)",
             worst_iter <= 1e-10, fmt("100 runs x 1000 steps: max |iterative - closed form| = %.3g (tol 1e-10)", worst_iter),
             false},
            {"closed-form-permutation", "Permuting the issue sequence leaves the terminal opinion unchanged",
             worst_perm <= 1e-10, fmt("max coordinate difference after permutation = %.3g (tol 1e-10)", worst_perm),
             false}};
}

double central_binomial(std::size_t t) {
    const double half = static_cast<double>(t) / 2.0;
    return std::exp(std::lgamma(static_cast<double>(t) + 1.0) - 2.0 * std::lgamma(half + 1.0) -
                    static_cast<double>(t) * std::log(2.0));
}

std::vector<CriterionLine> tie_gap_lines(const SuiteOptions& o) {
    constexpr std::uint64_t kStreamBase = std::uint64_t{2} << 40;
    const std::vector<double> fair{0.5, 0.5};

    const std::size_t m = 1000000;
    std::size_t ties = 0;
    for (std::size_t r = 0; r < m; ++r) {
        RngStream rng(o.seed, kStreamBase + r);
        const auto path = balls_in_bins_simulate(2, 100, fair, rng);
        ties += path.count(100, 0) == path.count(100, 1);
    }
    const double exact = central_binomial(100);
    const double p_hat = static_cast<double>(ties) / static_cast<double>(m);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(m));
    const double z = (p_hat - exact) / se;

    const std::size_t long_runs = 20000;
    std::vector<std::size_t> hits(kWeakTimes.size(), 0);
    for (std::size_t r = 0; r < long_runs; ++r) {
        RngStream rng(o.seed, kStreamBase + m + r);
        const auto path = balls_in_bins_simulate(2, kWeakTimes.back(), fair, rng);
        for (std::size_t k = 0; k < kWeakTimes.size(); ++k)
            hits[k] += path.count(kWeakTimes[k], 0) == path.count(kWeakTimes[k], 1);
    }
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    for (std::size_t k = 0; k < kWeakTimes.size(); ++k) {
        const double p = static_cast<double>(hits[k]) / static_cast<double>(long_runs);
        pts.emplace_back(static_cast<double>(kWeakTimes[k]), p);
        detail += fmt("t=%.0f: %.5f (exact %.5f); ", static_cast<double>(kWeakTimes[k]), p,
                      central_binomial(kWeakTimes[k]));
    }
    bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
    const double exponent = positive ? decay_rate_fit(pts, DecayModel::PowerLaw).rate : 0.0;

    return {{"tie-gap-t100", "Balls-in-bins tie probability at t=100 matches C(100,50)/2^100",
             std::abs(z) <= 3.0,
             fmt("%.0f/1e6 ties: %.6f vs exact %.6f (z = %.2f, limit 3)", static_cast<double>(ties), p_hat, exact, z),
             false},
            {"tie-gap-exponent", "Tie probability decays like t^(-1/2)", positive && exponent >= -0.6 && exponent <= -0.4,
             trimmed(fmt("fitted exponent %.4f over t in {1e2..1e4} (range [-0.6, -0.4]); ", exponent) + detail),
             false}};
}

SuiteReport ortho_suite(const SuiteOptions& o) {
    SuiteReport rep{"ortho-weak-not-strong", {}, 0.0};

    ExperimentConfig c = ortho_config("ortho-T1e4", 10000, o);
    c.record_every = 1;
    RunOptions ro = base_run_options(o);
    ro.reduce = [&](const Configuration& x0, const MetricsSeries& s, ReplicaRecord& rec) {
        recurrence_stats(x0, s, rec, c.steps);
        for (const auto& e : s.entries)
            if (std::binary_search(kWeakTimes.begin(), kWeakTimes.end(), e.t)) rec.series.entries.push_back(e);
    };
    const RunResult short_run = run(c, ro);

    std::vector<MetricsSeries> thinned;
    for (const auto& r : short_run.replicas) thinned.push_back(r.series);
    const auto curve = weak_polarization_curve(thinned, kWeakEpsilon, kWeakTimes);
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    bool positive = true;
    bool decreasing = true;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        pts.emplace_back(static_cast<double>(curve[k].t), curve[k].fraction_far.point);
        positive = positive && curve[k].fraction_far.point > 0.0;
        if (k > 0) decreasing = decreasing && curve[k].fraction_far.point <= curve[k - 1].fraction_far.point;
        detail += fmt("t=%.0f: %.4f; ", static_cast<double>(curve[k].t), curve[k].fraction_far.point);
    }
    const double exponent = positive ? decay_rate_fit(pts, DecayModel::PowerLaw).rate : 0.0;
    rep.lines.push_back({"weak-decay",
                         "Orthonormal HJMR weakly polarizes: Pr(rho >= 0.1) decays like t^(-1/2)",
                         positive && exponent >= -0.65 && exponent <= -0.35,
                         fmt("fitted exponent %.4f (range [-0.65, -0.35]); ", exponent) + detail +
                             (decreasing ? "curve decreasing" : "curve not monotone"),
                         false});
    rep.lines.push_back(recurrence_line("not-strong-T1e4", short_run));

    ExperimentConfig l = ortho_config("ortho-T1e5", 100000, o);
    RunOptions lo = base_run_options(o);
    lo.reduce = [&](const Configuration& x0, const MetricsSeries& s, ReplicaRecord& rec) {
        recurrence_stats(x0, s, rec, l.steps);
    };
    const RunResult long_run = run(l, lo);
    rep.lines.push_back(recurrence_line("not-strong-T1e5", long_run));

    for (auto& line : closed_form_lines(o)) rep.lines.push_back(std::move(line));
    for (auto& line : tie_gap_lines(o)) rep.lines.push_back(std::move(line));
    return rep;
}

// ----------------------------------------------------------- consensus-remark

SuiteReport consensus_suite(const SuiteOptions& o) {
    SuiteReport rep{"consensus-remark", {}, 0.0};
    ExperimentConfig c = base_config("consensus-remark", o);
    c.model = {ModelKind::SignedHjmr, 0.1, {}};
    c.n = 4;
    c.d = 3;
    c.steps = 20000;
    c.replicas = 2000;
    c.series_stride = 100;
    const double eps = c.epsilon_grid.front();
    RunOptions ro = base_run_options(o);
    ro.reduce = [eps](const Configuration&, const MetricsSeries& s, ReplicaRecord& rec) {
        const auto p = cluster_pattern(s.terminal_config, eps);
        rec.stats = {p ? static_cast<double>(p->canonical_index()) : -1.0};
    };
    const RunResult r = run(c, ro);

    std::vector<std::size_t> bins(8, 0);
    std::size_t clustered = 0;
    for (const auto& rec : r.replicas)
        if (rec.stats[0] >= 0.0) {
            ++bins[static_cast<std::size_t>(rec.stats[0])];
            ++clustered;
        }
    const auto chi = chi_square_uniform(bins);
    std::string counts;
    for (std::size_t b = 0; b < bins.size(); ++b) counts += (b ? "," : "") + std::to_string(bins[b]);
    rep.lines.push_back({"uniform-clusterings",
                         "Each of the 8 clusterings of 4 agents is equally likely from Haar starts", chi.p_value > 0.01,
                         fmt("chi-square %.3f on 7 dof, p = %.4f (need > 0.01); ", chi.statistic, chi.p_value) +
                             "counts [" + counts + "], " + std::to_string(clustered) + "/" +
                             std::to_string(r.replicas.size()) + " replicas within eps of P",
                         false});
    const double consensus = clustered ? static_cast<double>(bins[0]) / static_cast<double>(clustered) : 0.0;
    rep.lines.push_back({"consensus-fraction", "Consensus occurs with probability 2^(1-n) = 0.125",
                         consensus >= 0.095 && consensus <= 0.155,
                         fmt("consensus fraction %.4f (range [0.095, 0.155])", consensus), false});
    rep.lines.push_back(implication_line({&r}));
    return rep;
}

}  // namespace

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    SuiteReport rep;
    if (name == "signed-hjmr") rep = signed_hjmr_suite(options);
    else if (name == "party") rep = party_suite(options);
    else if (name == "ortho-weak-not-strong") rep = ortho_suite(options);
    else if (name == "lemma-checks") rep = run_lemma_checks(options);
    else if (name == "consensus-remark") rep = consensus_suite(options);
    else throw Error(ErrorCode::InvalidArgument, "unknown suite '" + name + "'");
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

}  // namespace polarsim::harness
