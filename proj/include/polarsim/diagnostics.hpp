#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polarsim/dynamics.hpp"
#include "polarsim/metrics.hpp"
#include "polarsim/rng.hpp"
#include "polarsim/sphere.hpp"

namespace polarsim {

enum class Verdict { Converged, NotConverged };

inline constexpr double kDefaultEpsilon = 0.01;
inline constexpr double kDefaultTailFraction = 0.2;

/// Finite-horizon surrogate for rho(X_t, P) -> 0: Converged iff rho < epsilon on
/// every recorded entry in the final tail_fraction of the series.
Verdict strong_polarization_verdict(const MetricsSeries& series, double epsilon = kDefaultEpsilon,
                                    double tail_fraction = kDefaultTailFraction);

struct EstimateWithCI {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.95;
    std::size_t samples = 0;
};

/// Wilson score interval for `successes` out of `trials`.
EstimateWithCI wilson_interval(std::size_t successes, std::size_t trials, double confidence = 0.95);

struct CurvePoint {
    std::size_t t = 0;
    EstimateWithCI fraction_far;
};

/// Fraction of replicas with rho >= epsilon at each requested time.
/// Throws TimeNotRecorded when a series lacks an entry at some t.
std::vector<CurvePoint> weak_polarization_curve(std::span<const MetricsSeries> ensemble, double epsilon,
                                                std::span<const std::size_t> times);

/// Fraction of recorded entries with rho <= epsilon.
double time_average_occupancy(const MetricsSeries& series, double epsilon);

enum class DecayModel { Geometric, PowerLaw };

struct DecayFit {
    /// per-step factor (geometric) or exponent (power law)
    double rate = 0.0;
    /// RMS residual of the log-space fit
    double residual = 0.0;
};

/// Least squares of log(value) on t (geometric) or log t (power law).
DecayFit decay_rate_fit(std::span<const std::pair<double, double>> points, DecayModel model);

/// Counts N_t of an i.i.d. categorical balls-in-bins process, t = 0..steps,
/// stored flat: counts(t, i) = data[t * d + i].
struct BallsInBinsPath {
    std::size_t d = 0;
    std::vector<double> probs;
    std::vector<std::uint32_t> data;

    std::size_t steps() const { return d == 0 ? 0 : data.size() / d - 1; }
    std::uint32_t count(std::size_t t, std::size_t bin) const { return data[t * d + bin]; }
    std::span<const std::uint32_t> counts_at(std::size_t t) const { return {data.data() + t * d, d}; }
};

BallsInBinsPath balls_in_bins_simulate(std::size_t d, std::size_t steps, std::span<const double> probs,
                                       RngStream& rng);

struct TieCensus {
    std::size_t d = 0;
    /// pair_ties[pair_index(i, j)]: times with N_i = N_j = max_k N_k
    std::vector<std::vector<std::size_t>> pair_ties;
    /// max_times[i]: times with N_i = max_k N_k
    std::vector<std::vector<std::size_t>> max_times;

    std::size_t pair_index(std::size_t i, std::size_t j) const;
};

TieCensus tie_event_census(const BallsInBinsPath& path);

/// Canonical sign pattern of the nearest polarized configuration when
/// rho <= epsilon, otherwise nothing.
std::optional<SignPattern> cluster_pattern(const Configuration& x, double epsilon,
                                           RhoMode mode = RhoMode::Exact);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness of fit against the uniform distribution over the bins.
ChiSquareResult chi_square_uniform(std::span<const std::size_t> observed);

/// Row-stochastic M with X_k proportional (row-wise) to M X_0 for k split-free
/// party steps, obtained by tracking each step's row normalizers.
struct TransferMatrix {
    std::size_t n = 0;
    std::vector<double> m;  // row-major
    double operator()(std::size_t i, std::size_t j) const { return m[i * n + j]; }
};

/// Throws InvalidArgument if one of the issues splits the configuration.
TransferMatrix split_free_transfer_matrix(const InfluenceMatrix& influence, const Configuration& x0,
                                          std::span<const UnitVector> issues);

/// Agents reachable from each agent in at most k steps (self loops included).
std::vector<bool> reachable_within(const InfluenceGraph& graph, std::size_t k);

/// delta_0 for orthonormal HJMR: the smallest rho over closed-form states in
/// which two coordinates that separate the agents (their restrictions are not
/// proportional) are tied at the maximum count and every other support
/// coordinate lags behind by any amount, including the infinite-lag limit.
/// Returns 0 when the agents are equal up to sign. Support size <= 5.
double ortho_separation_floor(const Configuration& x0, double eta);

}  // namespace polarsim
