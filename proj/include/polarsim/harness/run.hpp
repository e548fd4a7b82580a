#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polarsim/diagnostics.hpp"
#include "polarsim/harness/config.hpp"

namespace polarsim::harness {

/// What survives of one replica after its worker finishes.
struct ReplicaRecord {
    std::size_t replica = 0;
    std::uint64_t stream_index = 0;
    double terminal_rho = 0.0;
    std::vector<Verdict> verdicts;    // one per epsilon
    std::vector<double> occupancy;    // one per epsilon
    /// rho >= epsilon at the final recorded entry, one per epsilon
    std::vector<bool> far_at_end;
    /// full series only when RunOptions::keep_series is set
    MetricsSeries series;
    /// free-form per-replica statistics filled by RunOptions::reduce
    std::vector<double> stats;
    std::string csv_rows;
};

using ReplicaReducer =
    std::function<void(const Configuration& x0, const MetricsSeries& series, ReplicaRecord& record)>;

struct RunOptions {
    /// 0 = hardware concurrency, capped by POLARSIM_THREADS when set
    std::size_t threads = 0;
    bool keep_series = false;
    bool write_files = true;
    /// Executes replicas in a shuffled order; output must not change.
    std::optional<std::uint64_t> execution_shuffle;
    ReplicaReducer reduce;
};

struct AggregateVerdict {
    double epsilon = 0.0;
    EstimateWithCI converged;
    EstimateWithCI far_at_end;
    double mean_occupancy = 0.0;
    /// strong-implies-weak ordering: converged <= 1 - far_at_end
    bool implication_holds = true;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<ReplicaRecord> replicas;
    std::vector<AggregateVerdict> aggregates;
    bool any_init_normalized = false;
    double wall_seconds = 0.0;
    std::size_t threads_used = 1;
};

std::size_t resolve_threads(std::size_t requested);

/// Runs every replica (replica r uses RngStream(master_seed, r) for both its
/// initial state and its issues), aggregates verdicts, and writes series.csv,
/// summary.csv and manifest.json under config.outputs when write_files is set.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

inline constexpr const char* kSeriesHeader = "replica,t,rho,phi,max_angle,split";
inline constexpr const char* kSummaryHeader = "replica,stream_index,epsilon,verdict,occupancy,terminal_rho";

/// 17 significant digits, locale independent.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace polarsim::harness
