#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "polarsim/sphere.hpp"

namespace polarsim {

struct MetricsEntry {
    std::size_t t = 0;
    double rho = 0.0;
    /// Present when the canonically signed configuration is one-sided.
    std::optional<double> phi;
    double max_angle = 0.0;
    /// Some issue since the previous recorded entry split the agents.
    bool split = false;
};

struct MetricsSeries {
    std::vector<MetricsEntry> entries;
    Configuration terminal_config;
};

struct MetricsOptions {
    bool record_phi = true;
    /// Exact rho for n <= 24, heuristic above, unless forced.
    std::optional<RhoMode> rho_mode;
};

MetricsEntry compute_metrics(const Configuration& x, std::size_t t, bool split,
                             const MetricsOptions& options = {});

}  // namespace polarsim
