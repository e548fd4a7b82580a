#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polarsim/dynamics.hpp"
#include "polarsim/rng.hpp"

namespace polarsim::harness {

enum class ModelKind { Hjmr, SignedHjmr, Party };

struct ModelConfig {
    ModelKind kind = ModelKind::SignedHjmr;
    double eta = 0.1;
    /// Party only: n rows of n weights, row i = pulls on agent i.
    std::vector<std::vector<double>> influence;

    bool operator==(const ModelConfig&) const = default;
};

enum class DistributionKind { Haar, AxialTilt, FiniteSupport, OrthonormalBasis };

struct DistributionConfig {
    DistributionKind kind = DistributionKind::Haar;
    /// AxialTilt: density 1 + strength (d <axis, xi>^2 - 1)
    std::vector<double> axis;
    double strength = 0.0;
    /// FiniteSupport
    std::vector<std::vector<double>> atoms;
    std::vector<double> probs;

    bool operator==(const DistributionConfig&) const = default;
};

enum class InitKind { HaarRandom, Explicit, Polarized, EqualSupportRandom };

struct InitConfig {
    InitKind kind = InitKind::HaarRandom;
    std::vector<std::vector<double>> vectors;

    bool operator==(const InitConfig&) const = default;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ModelConfig model;
    DistributionConfig distribution;
    std::size_t n = 2;
    std::size_t d = 3;
    InitConfig init;
    std::size_t steps = 0;
    std::size_t replicas = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> epsilon_grid{0.01};
    double tail_fraction = 0.2;
    /// 0 selects default_record_every(steps)
    std::size_t record_every = 0;
    /// series.csv keeps every k-th recorded entry plus the last
    std::size_t series_stride = 1;
    bool record_phi = true;
    std::string outputs = "polarsim-out";

    bool operator==(const ExperimentConfig&) const = default;
};

std::string to_string(ModelKind kind);
std::string to_string(DistributionKind kind);
std::string to_string(InitKind kind);

/// Parses YAML text. Unknown keys and invalid values raise ConfigInvalid with
/// the dotted field path in the message.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Field-level checks shared by the parser and programmatic callers.
void validate_config(const ExperimentConfig& config);

std::size_t effective_record_every(const ExperimentConfig& config);
ModelSpec build_model(const ExperimentConfig& config);
IssueDistribution build_distribution(const ExperimentConfig& config);

struct InitialState {
    Configuration x0;
    /// explicit vectors had to be rescaled onto the sphere
    bool normalized = false;
};

/// Draws X_0 for one replica from the replica's own stream.
InitialState initial_configuration(const ExperimentConfig& config, RngStream& rng);

}  // namespace polarsim::harness
