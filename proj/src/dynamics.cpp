#include "polarsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polarsim/kernels.hpp"

namespace polarsim {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

InfluenceMatrix::InfluenceMatrix(std::size_t n, std::vector<double> weights)
    : n_(n), w_(std::move(weights)) {
    if (w_.size() != n_ * n_) throw Error(ErrorCode::DimensionMismatch, "influence matrix must be n x n");
    for (double v : w_)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, "influence weights must be finite and >= 0");
}

InfluenceMatrix InfluenceMatrix::directed_cycle(std::size_t n, double weight, double self_weight) {
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i * n + i] += self_weight;
        if (n > 1) w[i * n + (i + 1) % n] += weight;
    }
    return InfluenceMatrix(n, std::move(w));
}

InfluenceMatrix InfluenceMatrix::uniform(std::size_t n, double weight) {
    return InfluenceMatrix(n, std::vector<double>(n * n, weight));
}

std::string model_name(const ModelSpec& model) {
    return std::visit(Overloaded{[](const Hjmr&) { return std::string("hjmr"); },
                                 [](const SignedHjmr&) { return std::string("signed-hjmr"); },
                                 [](const Party&) { return std::string("party"); }},
                      model);
}

void validate_model(const ModelSpec& model, std::size_t n) {
    std::visit(Overloaded{[](const Hjmr& m) {
                              if (!(m.eta > 0.0) || !std::isfinite(m.eta))
                                  throw Error(ErrorCode::InvalidArgument, "HJMR eta must be > 0");
                          },
                          [](const SignedHjmr& m) {
                              if (!(m.eta > 0.0) || !std::isfinite(m.eta))
                                  throw Error(ErrorCode::InvalidArgument, "signed HJMR eta must be > 0");
                          },
                          [n](const Party& m) {
                              if (m.influence.size() != n)
                                  throw Error(ErrorCode::DimensionMismatch,
                                              "party influence is " + std::to_string(m.influence.size()) +
                                                  "x" + std::to_string(m.influence.size()) + " but n = " +
                                                  std::to_string(n));
                          }},
               model);
}

TiltedHaar axial_tilt(const UnitVector& axis, double strength) {
    const auto d = static_cast<double>(axis.dim());
    if (!(strength >= 0.0) || strength >= 1.0)
        throw Error(ErrorCode::InvalidArgument, "axial tilt strength must lie in [0, 1)");
    std::vector<double> u(axis.coords().begin(), axis.coords().end());
    TiltedHaar t;
    t.dim = axis.dim();
    t.density = [u = std::move(u), strength, d](std::span<const double> xi) {
        double c = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) c += u[k] * xi[k];
        return 1.0 + strength * (d * c * c - 1.0);
    };
    t.lower = 1.0 - strength;
    t.upper = 1.0 + strength * (d - 1.0);
    return t;
}

FiniteSupport orthonormal_basis(std::size_t d) {
    FiniteSupport fs;
    for (std::size_t k = 0; k < d; ++k) {
        fs.atoms.push_back(UnitVector::basis(d, k));
        fs.probs.push_back(1.0 / static_cast<double>(d));
    }
    return fs;
}

std::size_t issue_dim(const IssueDistribution& dist) {
    return std::visit(Overloaded{[](const HaarUniform& h) { return h.dim; },
                                 [](const TiltedHaar& t) { return t.dim; },
                                 [](const FiniteSupport& f) {
                                     return f.atoms.empty() ? std::size_t{0} : f.atoms.front().dim();
                                 }},
                      dist);
}

void validate_distribution(const IssueDistribution& dist) {
    std::visit(
        Overloaded{[](const HaarUniform& h) {
                       if (h.dim < 2) throw Error(ErrorCode::InvalidArgument, "issue dimension must be >= 2");
                   },
                   [](const TiltedHaar& t) {
                       if (t.dim < 2) throw Error(ErrorCode::InvalidArgument, "issue dimension must be >= 2");
                       if (!t.density) throw Error(ErrorCode::InvalidArgument, "tilted Haar needs a density");
                       if (!(t.lower > 0.0 && t.lower <= t.upper))
                           throw Error(ErrorCode::InvalidArgument, "density bounds need 0 < C <= C'");
                   },
                   [](const FiniteSupport& f) {
                       if (f.atoms.empty() || f.atoms.size() != f.probs.size())
                           throw Error(ErrorCode::InvalidArgument, "finite support needs matching atoms/probs");
                       double total = 0.0;
                       for (std::size_t i = 0; i < f.atoms.size(); ++i) {
                           if (f.atoms[i].dim() != f.atoms.front().dim())
                               throw Error(ErrorCode::DimensionMismatch, "atoms differ in dimension");
                           if (!(f.probs[i] >= 0.0))
                               throw Error(ErrorCode::InvalidArgument, "probabilities must be >= 0");
                           total += f.probs[i];
                       }
                       if (std::abs(total - 1.0) > 1e-12)
                           throw Error(ErrorCode::InvalidArgument,
                                       "probabilities sum to " + std::to_string(total));
                   }},
        dist);
}

namespace {

void haar_into(RngStream& rng, std::span<double> out) {
    for (;;) {
        double sq = 0.0;
        for (double& v : out) {
            v = rng.normal();
            sq += v * v;
        }
        const double r = std::sqrt(sq);
        if (r >= 1e-6) {
            for (double& v : out) v /= r;
            return;
        }
    }
}

}  // namespace

void sample_issue_into(const IssueDistribution& dist, RngStream& rng, std::span<double> out) {
    std::visit(Overloaded{[&](const HaarUniform&) { haar_into(rng, out); },
                          [&](const TiltedHaar& t) {
                              for (std::size_t tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
                                  haar_into(rng, out);
                                  if (rng.uniform() * t.upper < t.density(out)) return;
                              }
                              throw Error(ErrorCode::RejectionStall,
                                          "tilted Haar rejected 10^6 consecutive proposals; density "
                                          "bound C' is violated");
                          },
                          [&](const FiniteSupport& f) {
                              const double u = rng.uniform();
                              double acc = 0.0;
                              std::size_t pick = f.atoms.size() - 1;
                              for (std::size_t i = 0; i < f.atoms.size(); ++i) {
                                  acc += f.probs[i];
                                  if (u < acc) {
                                      pick = i;
                                      break;
                                  }
                              }
                              // skip trailing zero-probability atoms on round-off
                              while (pick > 0 && f.probs[pick] == 0.0) --pick;
                              const auto c = f.atoms[pick].coords();
                              std::copy(c.begin(), c.end(), out.begin());
                          }},
               dist);
}

UnitVector sample_issue(const IssueDistribution& dist, RngStream& rng) {
    std::vector<double> out(issue_dim(dist));
    sample_issue_into(dist, rng, out);
    return project_to_sphere(out);
}

namespace {

/// Unnormalized update into `next`, then projection. `dots` holds <x_i, xi>.
void advance(const ModelSpec& model, std::span<const double> rows, std::size_t n, std::size_t d,
             std::span<const double> xi, std::span<const double> dots, std::span<double> next) {
    std::visit(Overloaded{[&](const Hjmr& m) {
                              for (std::size_t i = 0; i < n; ++i) {
                                  const double c = m.eta * dots[i];
                                  for (std::size_t k = 0; k < d; ++k)
                                      next[i * d + k] = rows[i * d + k] + c * xi[k];
                              }
                          },
                          [&](const SignedHjmr& m) {
                              for (std::size_t i = 0; i < n; ++i) {
                                  const double c = m.eta * sgn(dots[i]);
                                  for (std::size_t k = 0; k < d; ++k)
                                      next[i * d + k] = rows[i * d + k] + c * xi[k];
                              }
                          },
                          [&](const Party& m) {
                              for (std::size_t i = 0; i < n; ++i) {
                                  const int si = sgn(dots[i]);
                                  double* out = &next[i * d];
                                  for (std::size_t k = 0; k < d; ++k) out[k] = rows[i * d + k];
                                  // j runs over all agents, i included
                                  for (std::size_t j = 0; j < n; ++j) {
                                      const double w = m.influence(i, j);
                                      if (w == 0.0) continue;
                                      const double c = sgn(dots[j]) == si ? w : -w;
                                      for (std::size_t k = 0; k < d; ++k) out[k] += c * rows[j * d + k];
                                  }
                              }
                          }},
               model);

    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) sq += next[i * d + k] * next[i * d + k];
        const double r = std::sqrt(sq);
        if (!(r >= kZeroNormThreshold))
            throw Error(ErrorCode::ZeroVector,
                        "update of agent " + std::to_string(i) + " vanished (norm " + std::to_string(r) + ")");
        for (std::size_t k = 0; k < d; ++k) next[i * d + k] /= r;
    }
}

bool split_from_dots(std::span<const double> dots) {
    const int first = sgn(dots[0]);
    return std::any_of(dots.begin() + 1, dots.end(), [first](double v) { return sgn(v) != first; });
}

}  // namespace

Configuration step(const ModelSpec& model, const Configuration& x, const UnitVector& xi) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    if (xi.dim() != d) throw Error(ErrorCode::DimensionMismatch, "issue dimension differs from agents");
    validate_model(model, n);
    std::vector<double> dots(n);
    kernels::dot_rows(x.data(), d, xi.coords(), dots);
    std::vector<double> next(n * d);
    advance(model, x.data(), n, d, xi.coords(), dots, next);
    return Configuration::from_rows(n, d, std::move(next));
}

bool split_event(std::span<const double> rows, std::size_t n, std::size_t d, std::span<const double> xi) {
    if (xi.size() != d) throw Error(ErrorCode::DimensionMismatch, "issue dimension differs from agents");
    std::vector<double> dots(n);
    kernels::dot_rows(rows, d, xi, dots);
    return split_from_dots(dots);
}

bool split_event(const Configuration& x, const UnitVector& xi) {
    return split_event(x.data(), x.size(), x.dim(), xi.coords());
}

std::size_t default_record_every(std::size_t steps) {
    constexpr std::size_t kMaxRecords = 10000;
    return steps <= kMaxRecords ? 1 : (steps + kMaxRecords - 1) / kMaxRecords;
}

MetricsSeries simulate(const ModelSpec& model, const IssueDistribution& dist, const Configuration& x0,
                       std::size_t steps, RngStream& rng, std::size_t record_every,
                       const MetricsOptions& options) {
    const std::size_t n = x0.size();
    const std::size_t d = x0.dim();
    if (record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
    if (issue_dim(dist) != d) throw Error(ErrorCode::DimensionMismatch, "issue dimension differs from agents");
    validate_model(model, n);
    validate_distribution(dist);

    MetricsSeries series;
    series.entries.reserve(steps / record_every + 2);
    series.entries.push_back(compute_metrics(x0, 0, false, options));

    std::vector<double> cur(x0.data().begin(), x0.data().end());
    std::vector<double> next(n * d);
    std::vector<double> xi(d);
    std::vector<double> dots(n);
    bool split_since_record = false;

    for (std::size_t t = 1; t <= steps; ++t) {
        sample_issue_into(dist, rng, xi);
        kernels::dot_rows(cur, d, xi, dots);
        split_since_record = split_since_record || split_from_dots(dots);
        try {
            advance(model, cur, n, d, xi, dots, next);
        } catch (const Error& e) {
            throw Error(e.code(), "at step " + std::to_string(t) + ": " + e.what());
        }
        cur.swap(next);
        if (t % record_every == 0 || t == steps) {
            const Configuration x = Configuration::from_rows(n, d, cur);
            series.entries.push_back(compute_metrics(x, t, split_since_record, options));
            split_since_record = false;
        }
    }
    series.terminal_config = Configuration::from_rows(n, d, std::move(cur));
    return series;
}

UnitVector orthonormal_closed_form(const UnitVector& v0, std::span<const std::uint64_t> counts, double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be > 0");
    if (counts.size() != v0.dim()) throw Error(ErrorCode::DimensionMismatch, "one count per coordinate");
    const double log_gain = std::log1p(eta);
    const auto top = *std::max_element(counts.begin(), counts.end());
    std::vector<double> z(v0.dim());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double exponent = (static_cast<double>(counts[k]) - static_cast<double>(top)) * log_gain;
        z[k] = v0[k] * std::exp(exponent);
    }
    if (norm(z) < kZeroNormThreshold)
        throw Error(ErrorCode::ZeroVector,
                    "starting vector has no mass on the leading coordinates and the rest underflowed");
    return project_to_sphere(z);
}

InfluenceGraph InfluenceGraph::from(const InfluenceMatrix& influence) {
    InfluenceGraph g;
    g.n = influence.size();
    g.adjacency.resize(g.n * g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) g.adjacency[i * g.n + j] = influence(i, j) > 0.0;
    return g;
}

bool is_irreducible(const InfluenceGraph& graph) {
    const std::size_t n = graph.n;
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph needs n >= 1");
    std::vector<bool> reach = graph.adjacency;
    for (std::size_t round = 0; round < n; ++round) {
        std::vector<bool> grown = reach;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m) {
                if (!reach[i * n + m]) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (graph.edge(m, j)) grown[i * n + j] = true;
            }
        if (grown == reach) break;
        reach = std::move(grown);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && !reach[i * n + j]) return false;
    return true;
}

}  // namespace polarsim
