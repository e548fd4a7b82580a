#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "polarsim/metrics.hpp"
#include "polarsim/rng.hpp"
#include "polarsim/sphere.hpp"

namespace polarsim {

/// eta^{(i)}_j >= 0 at (row i, column j): the pull of agent j on agent i.
class InfluenceMatrix {
public:
    InfluenceMatrix() = default;
    InfluenceMatrix(std::size_t n, std::vector<double> weights);

    /// self weight on the diagonal, `weight` on i -> i+1 (mod n)
    static InfluenceMatrix directed_cycle(std::size_t n, double weight, double self_weight);
    static InfluenceMatrix uniform(std::size_t n, double weight);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
    const std::vector<double>& weights() const noexcept { return w_; }

    bool operator==(const InfluenceMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
};

struct Hjmr {
    double eta = 0.1;
};
struct SignedHjmr {
    double eta = 0.1;
};
struct Party {
    InfluenceMatrix influence;
};

/// Which update rule drives the chain.
using ModelSpec = std::variant<Hjmr, SignedHjmr, Party>;

std::string model_name(const ModelSpec& model);
/// Throws InvalidArgument / DimensionMismatch for eta <= 0, negative weights,
/// or a Party matrix whose size differs from n.
void validate_model(const ModelSpec& model, std::size_t n);

struct HaarUniform {
    std::size_t dim = 3;
};

/// Law with density f relative to normalized Haar measure, lower <= f <= upper.
struct TiltedHaar {
    std::size_t dim = 3;
    std::function<double(std::span<const double>)> density;
    double lower = 1.0;
    double upper = 1.0;
};

struct FiniteSupport {
    std::vector<UnitVector> atoms;
    std::vector<double> probs;
};

using IssueDistribution = std::variant<HaarUniform, TiltedHaar, FiniteSupport>;

/// f(xi) = 1 + strength * (d <axis, xi>^2 - 1); integrates to 1 under Haar and
/// is even in xi. Bounds: [1 - strength, 1 + strength (d - 1)].
TiltedHaar axial_tilt(const UnitVector& axis, double strength);
/// Uniform over {e_1, ..., e_d}.
FiniteSupport orthonormal_basis(std::size_t d);

std::size_t issue_dim(const IssueDistribution& dist);
void validate_distribution(const IssueDistribution& dist);

inline constexpr std::size_t kMaxConsecutiveRejections = 1000000;

UnitVector sample_issue(const IssueDistribution& dist, RngStream& rng);
/// Allocation-free variant writing d coordinates into `out`.
void sample_issue_into(const IssueDistribution& dist, RngStream& rng, std::span<double> out);

/// Zero inner products map to 0, as the models require.
inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// One transition X_t -> X_{t+1} for the given issue.
Configuration step(const ModelSpec& model, const Configuration& x, const UnitVector& xi);

/// True iff the agents do not all share sgn(<x_i, xi>); 0 is its own class.
bool split_event(const Configuration& x, const UnitVector& xi);
bool split_event(std::span<const double> rows, std::size_t n, std::size_t d,
                 std::span<const double> xi);

/// Recording stride: 1 up to 10^4 steps, else ceil(steps / 10^4).
std::size_t default_record_every(std::size_t steps);

/// Runs `steps` transitions, recording every `record_every` steps and the
/// final state. The series is a pure function of the arguments.
MetricsSeries simulate(const ModelSpec& model, const IssueDistribution& dist, const Configuration& x0,
                       std::size_t steps, RngStream& rng, std::size_t record_every,
                       const MetricsOptions& options = {});

/// HJMR under basis issues depends only on the per-coordinate issue counts:
/// z = P((1+eta)^{N_1} v_1, ..., (1+eta)^{N_d} v_d), evaluated in log space.
UnitVector orthonormal_closed_form(const UnitVector& v0, std::span<const std::uint64_t> counts,
                                   double eta);

/// A_ij = (eta^{(i)}_j > 0).
struct InfluenceGraph {
    std::size_t n = 0;
    std::vector<bool> adjacency;

    static InfluenceGraph from(const InfluenceMatrix& influence);
    bool edge(std::size_t i, std::size_t j) const { return adjacency[i * n + j]; }
};

/// Every agent reaches every other agent along directed edges.
bool is_irreducible(const InfluenceGraph& graph);

}  // namespace polarsim
