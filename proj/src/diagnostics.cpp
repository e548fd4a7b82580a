#include "polarsim/diagnostics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace polarsim {

Verdict strong_polarization_verdict(const MetricsSeries& series, double epsilon, double tail_fraction) {
    if (series.entries.empty()) throw Error(ErrorCode::EmptySeries, "no recorded entries");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");
    const std::size_t m = series.entries.size();
    const auto tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(m) - 1e-9)));
    for (std::size_t i = m - tail; i < m; ++i)
        if (!(series.entries[i].rho < epsilon)) return Verdict::NotConverged;
    return Verdict::Converged;
}

EstimateWithCI wilson_interval(std::size_t successes, std::size_t trials, double confidence) {
    if (trials == 0) throw Error(ErrorCode::InvalidArgument, "Wilson interval needs trials > 0");
    if (successes > trials) throw Error(ErrorCode::InvalidArgument, "successes exceed trials");
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
    const auto nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return EstimateWithCI{p, std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half)),
                          confidence, trials};
}

namespace {

const MetricsEntry* entry_at(const MetricsSeries& s, std::size_t t) {
    auto it = std::lower_bound(s.entries.begin(), s.entries.end(), t,
                               [](const MetricsEntry& e, std::size_t v) { return e.t < v; });
    if (it == s.entries.end() || it->t != t) return nullptr;
    return &*it;
}

}  // namespace

std::vector<CurvePoint> weak_polarization_curve(std::span<const MetricsSeries> ensemble, double epsilon,
                                                std::span<const std::size_t> times) {
    if (ensemble.empty()) throw Error(ErrorCode::EmptySeries, "empty ensemble");
    std::vector<CurvePoint> curve;
    curve.reserve(times.size());
    for (std::size_t t : times) {
        std::size_t far = 0;
        for (const auto& s : ensemble) {
            const MetricsEntry* e = entry_at(s, t);
            if (e == nullptr) throw Error(ErrorCode::TimeNotRecorded, "t = " + std::to_string(t));
            if (e->rho >= epsilon) ++far;
        }
        curve.push_back(CurvePoint{t, wilson_interval(far, ensemble.size())});
    }
    return curve;
}

double time_average_occupancy(const MetricsSeries& series, double epsilon) {
    if (series.entries.empty()) throw Error(ErrorCode::EmptySeries, "no recorded entries");
    const auto inside = std::count_if(series.entries.begin(), series.entries.end(),
                                      [epsilon](const MetricsEntry& e) { return e.rho <= epsilon; });
    return static_cast<double>(inside) / static_cast<double>(series.entries.size());
}

DecayFit decay_rate_fit(std::span<const std::pair<double, double>> points, DecayModel model) {
    if (points.size() < 3) throw Error(ErrorCode::InvalidArgument, "decay fit needs >= 3 points");
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [t, v] : points) {
        if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveValue, "value at t = " + std::to_string(t));
        if (model == DecayModel::PowerLaw && !(t > 0.0))
            throw Error(ErrorCode::InvalidArgument, "power-law fit needs t > 0");
        xs.push_back(model == DecayModel::PowerLaw ? std::log(t) : t);
        ys.push_back(std::log(v));
    }
    const auto m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / m;
        my += ys[i] / m;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "decay fit needs distinct abscissae");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss += r * r;
    }
    const double residual = std::sqrt(ss / m);
    return DecayFit{model == DecayModel::Geometric ? std::exp(slope) : slope, residual};
}

BallsInBinsPath balls_in_bins_simulate(std::size_t d, std::size_t steps, std::span<const double> probs,
                                       RngStream& rng) {
    if (d == 0 || probs.size() != d) throw Error(ErrorCode::InvalidArgument, "need one probability per bin");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bin probabilities must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "bin probabilities must sum to 1");

    BallsInBinsPath path;
    path.d = d;
    path.probs.assign(probs.begin(), probs.end());
    path.data.assign((steps + 1) * d, 0);
    for (std::size_t t = 1; t <= steps; ++t) {
        std::copy_n(path.data.begin() + static_cast<std::ptrdiff_t>((t - 1) * d), d,
                    path.data.begin() + static_cast<std::ptrdiff_t>(t * d));
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t bin = d - 1;
        for (std::size_t i = 0; i < d; ++i) {
            acc += probs[i];
            if (u < acc) {
                bin = i;
                break;
            }
        }
        while (bin > 0 && probs[bin] == 0.0) --bin;
        ++path.data[t * d + bin];
    }
    return path;
}

std::size_t TieCensus::pair_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    // row-major upper triangle without the diagonal
    return i * d - i * (i + 1) / 2 + (j - i - 1);
}

TieCensus tie_event_census(const BallsInBinsPath& path) {
    if (path.d == 0 || path.data.empty()) throw Error(ErrorCode::EmptySeries, "empty balls-in-bins path");
    TieCensus census;
    census.d = path.d;
    census.pair_ties.resize(path.d * (path.d - 1) / 2);
    census.max_times.resize(path.d);
    std::vector<std::size_t> leaders;
    for (std::size_t t = 0; t <= path.steps(); ++t) {
        const auto counts = path.counts_at(t);
        const std::uint32_t top = *std::max_element(counts.begin(), counts.end());
        leaders.clear();
        for (std::size_t i = 0; i < path.d; ++i)
            if (counts[i] == top) {
                leaders.push_back(i);
                census.max_times[i].push_back(t);
            }
        for (std::size_t a = 0; a < leaders.size(); ++a)
            for (std::size_t b = a + 1; b < leaders.size(); ++b)
                census.pair_ties[census.pair_index(leaders[a], leaders[b])].push_back(t);
    }
    return census;
}

std::optional<SignPattern> cluster_pattern(const Configuration& x, double epsilon, RhoMode mode) {
    PolarizedDistance pd = distance_to_polarized(x, mode);
    if (pd.rho <= epsilon) return std::move(pd.argmin_pattern);
    return std::nullopt;
}

ChiSquareResult chi_square_uniform(std::span<const std::size_t> observed) {
    if (observed.size() < 2) throw Error(ErrorCode::InvalidArgument, "chi-square needs >= 2 bins");
    double total = 0.0;
    for (std::size_t o : observed) total += static_cast<double>(o);
    if (total == 0.0) throw Error(ErrorCode::InvalidArgument, "chi-square needs observations");
    const double expected = total / static_cast<double>(observed.size());
    double stat = 0.0;
    for (std::size_t o : observed) {
        const double diff = static_cast<double>(o) - expected;
        stat += diff * diff / expected;
    }
    const std::size_t dof = observed.size() - 1;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(dof)), stat));
    return ChiSquareResult{stat, dof, p};
}

TransferMatrix split_free_transfer_matrix(const InfluenceMatrix& influence, const Configuration& x0,
                                          std::span<const UnitVector> issues) {
    const std::size_t n = x0.size();
    const std::size_t d = x0.dim();
    if (influence.size() != n) throw Error(ErrorCode::DimensionMismatch, "influence size differs from n");

    // Split-free party step: u_i = x_i + sum_j eta_ij x_j = sum_j W_ij x_j.
    std::vector<double> w(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = influence(i, j) + (i == j ? 1.0 : 0.0);

    std::vector<double> s(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i * n + i] = 1.0;
    std::vector<double> rows(x0.data().begin(), x0.data().end());
    std::vector<double> next(n * d);
    std::vector<double> ws(n * n);

    for (const auto& xi : issues) {
        if (split_event(rows, n, d, xi.coords()))
            throw Error(ErrorCode::InvalidArgument, "issue splits the configuration");
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < d; ++k) next[i * d + k] += w[i * n + j] * rows[j * d + k];
        std::fill(ws.begin(), ws.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m)
                for (std::size_t j = 0; j < n; ++j) ws[i * n + j] += w[i * n + m] * s[m * n + j];
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) sq += next[i * d + k] * next[i * d + k];
            const double r = std::sqrt(sq);
            if (!(r >= kZeroNormThreshold)) throw Error(ErrorCode::ZeroVector, "party update vanished");
            for (std::size_t k = 0; k < d; ++k) next[i * d + k] /= r;
            for (std::size_t j = 0; j < n; ++j) ws[i * n + j] /= r;
        }
        rows.swap(next);
        s.swap(ws);
    }

    TransferMatrix out{n, std::move(s)};
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += out.m[i * n + j];
        for (std::size_t j = 0; j < n; ++j) out.m[i * n + j] /= total;
    }
    return out;
}

std::vector<bool> reachable_within(const InfluenceGraph& graph, std::size_t k) {
    const std::size_t n = graph.n;
    std::vector<bool> reach(n * n, false);
    for (std::size_t i = 0; i < n; ++i) reach[i * n + i] = true;
    for (std::size_t round = 0; round < k; ++round) {
        std::vector<bool> grown = reach;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m) {
                if (!reach[i * n + m]) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (graph.edge(m, j)) grown[i * n + j] = true;
            }
        reach = std::move(grown);
    }
    return reach;
}

double ortho_separation_floor(const Configuration& x0, double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be > 0");
    const std::size_t n = x0.size();
    const std::size_t d = x0.dim();

    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < d; ++k) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) any = any || x0.row(i)[k] != 0.0;
        if (any) support.push_back(k);
    }
    if (support.size() > 5) throw Error(ErrorCode::InvalidArgument, "support larger than 5 coordinates");

    // lag L scales a coordinate by (1+eta)^-L; lags past `deepest` are
    // indistinguishable from the infinite-lag limit at double precision
    const double gain = 1.0 + eta;
    const auto deepest = static_cast<std::size_t>(std::ceil(8.0 * std::log(10.0) / std::log(gain)));

    double floor = std::numeric_limits<double>::infinity();
    bool separated = false;
    std::vector<double> rows(n * d);
    for (std::size_t a = 0; a < support.size(); ++a) {
        for (std::size_t b = a + 1; b < support.size(); ++b) {
            const std::size_t ca = support[a];
            const std::size_t cb = support[b];
            bool proportional = true;
            for (std::size_t i = 0; i < n && proportional; ++i)
                for (std::size_t j = i + 1; j < n && proportional; ++j) {
                    const double cross = x0.row(i)[ca] * x0.row(j)[cb] - x0.row(i)[cb] * x0.row(j)[ca];
                    const double scale = std::hypot(x0.row(i)[ca], x0.row(i)[cb]) *
                                         std::hypot(x0.row(j)[ca], x0.row(j)[cb]);
                    proportional = std::abs(cross) <= 1e-12 * std::max(scale, 1e-300) ||
                                   scale == 0.0;
                }
            if (proportional) continue;
            separated = true;

            std::vector<std::size_t> others;
            for (std::size_t c : support)
                if (c != ca && c != cb) others.push_back(c);
            std::vector<std::size_t> lag(others.size(), 0);
            for (;;) {
                bool vanished = false;
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t k = 0; k < d; ++k) rows[i * d + k] = 0.0;
                    rows[i * d + ca] = x0.row(i)[ca];
                    rows[i * d + cb] = x0.row(i)[cb];
                    for (std::size_t o = 0; o < others.size(); ++o)
                        rows[i * d + others[o]] =
                            lag[o] > deepest ? 0.0
                                             : x0.row(i)[others[o]] * std::pow(gain, -static_cast<double>(lag[o]));
                    double sq = 0.0;
                    for (std::size_t k = 0; k < d; ++k) sq += rows[i * d + k] * rows[i * d + k];
                    if (sq == 0.0) {
                        vanished = true;
                        break;
                    }
                    for (std::size_t k = 0; k < d; ++k) rows[i * d + k] /= std::sqrt(sq);
                }
                if (!vanished)
                    floor = std::min(floor, distance_to_polarized(Configuration::from_rows(n, d, rows)).rho);

                std::size_t o = 0;
                while (o < lag.size() && ++lag[o] > deepest + 1) lag[o++] = 0;
                if (o == lag.size()) break;
            }
        }
    }
    return separated ? floor : 0.0;
}

}  // namespace polarsim
