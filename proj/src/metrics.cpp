#include "polarsim/metrics.hpp"

#include "polarsim/phi.hpp"

namespace polarsim {

MetricsEntry compute_metrics(const Configuration& x, std::size_t t, bool split,
                             const MetricsOptions& options) {
    MetricsEntry e;
    e.t = t;
    e.split = split;
    const RhoMode mode = options.rho_mode.value_or(x.size() <= kExactRhoMaxAgents ? RhoMode::Exact
                                                                                  : RhoMode::Heuristic);
    e.rho = distance_to_polarized(x, mode).rho;
    e.max_angle = max_pairwise_angle(x);
    if (options.record_phi) {
        const Configuration aligned = canonical_sign_alignment(x).aligned;
        try {
            const PhiResult phi = phi_potential(aligned);
            if (phi.certified()) e.phi = phi.phi;
        } catch (const Error& err) {
            if (err.code() != ErrorCode::DegenerateInput) throw;
        }
    }
    return e;
}

}  // namespace polarsim
