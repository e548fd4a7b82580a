#include "polarsim/harness/run.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "polarsim/kernels.hpp"
#include "polarsim/version.hpp"

namespace polarsim::harness {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("POLARSIM_THREADS")) {
        std::size_t cap = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) return std::min(hw, cap);
    }
    return hw;
}

namespace {

void append_rows(std::string& out, std::size_t replica, const MetricsSeries& s, std::size_t stride) {
    const std::string rep = std::to_string(replica);
    for (std::size_t k = 0; k < s.entries.size(); ++k) {
        if (k % stride != 0 && k + 1 != s.entries.size()) continue;
        const MetricsEntry& e = s.entries[k];
        out += rep;
        out += ',';
        out += std::to_string(e.t);
        out += ',';
        out += format_double(e.rho);
        out += ',';
        if (e.phi) out += format_double(*e.phi);
        out += ',';
        out += format_double(e.max_angle);
        out += ',';
        out += e.split ? '1' : '0';
        out += '\n';
    }
}

ReplicaRecord run_replica(const ExperimentConfig& config, const ModelSpec& model, const IssueDistribution& dist,
                          std::size_t replica, const RunOptions& options, bool& normalized) {
    RngStream rng(config.master_seed, replica);
    const InitialState init = initial_configuration(config, rng);
    normalized = init.normalized;
    MetricsOptions mopts;
    mopts.record_phi = config.record_phi;
    MetricsSeries series;
    try {
        series = simulate(model, dist, init.x0, config.steps, rng, effective_record_every(config), mopts);
    } catch (const Error& e) {
        throw Error(e.code(), "replica " + std::to_string(replica) + ": " + e.what());
    }

    ReplicaRecord rec;
    rec.replica = replica;
    rec.stream_index = replica;
    rec.terminal_rho = series.entries.back().rho;
    for (double eps : config.epsilon_grid) {
        rec.verdicts.push_back(strong_polarization_verdict(series, eps, config.tail_fraction));
        rec.occupancy.push_back(time_average_occupancy(series, eps));
        rec.far_at_end.push_back(series.entries.back().rho >= eps);
    }
    if (options.write_files) append_rows(rec.csv_rows, replica, series, config.series_stride);
    if (options.reduce) options.reduce(init.x0, series, rec);
    if (options.keep_series) rec.series = std::move(series);
    return rec;
}

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["name"] = c.name;
    j["model"] = {{"kind", to_string(c.model.kind)}, {"eta", c.model.eta}, {"influence", c.model.influence}};
    j["distribution"] = {{"kind", to_string(c.distribution.kind)},
                         {"axis", c.distribution.axis},
                         {"strength", c.distribution.strength},
                         {"atoms", c.distribution.atoms},
                         {"probs", c.distribution.probs}};
    j["n"] = c.n;
    j["d"] = c.d;
    j["init"] = {{"kind", to_string(c.init.kind)}, {"vectors", c.init.vectors}};
    j["steps"] = c.steps;
    j["replicas"] = c.replicas;
    j["master_seed"] = c.master_seed;
    j["epsilon_grid"] = c.epsilon_grid;
    j["tail_fraction"] = c.tail_fraction;
    j["record_every"] = c.record_every;
    j["effective_record_every"] = effective_record_every(c);
    j["series_stride"] = c.series_stride;
    j["record_phi"] = c.record_phi;
    j["outputs"] = c.outputs;
    return j;
}

std::string verdict_name(Verdict v) { return v == Verdict::Converged ? "Converged" : "NotConverged"; }

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();
    const ModelSpec model = build_model(config);
    const IssueDistribution dist = build_distribution(config);
    validate_model(model, config.n);
    validate_distribution(dist);

    const std::size_t count = config.replicas;
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    if (options.execution_shuffle) {
        RngStream shuffle_rng(*options.execution_shuffle, 0);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
    }

    RunResult result;
    result.config = config;
    result.replicas.resize(count);
    result.threads_used = std::min(resolve_threads(options.threads), count);
    std::vector<char> normalized(count, 0);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= count || failed.load()) return;
            const std::size_t replica = order[slot];
            try {
                bool norm_flag = false;
                result.replicas[replica] = run_replica(config, model, dist, replica, options, norm_flag);
                normalized[replica] = norm_flag;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };
    if (result.threads_used <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < result.threads_used; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    result.any_init_normalized = std::any_of(normalized.begin(), normalized.end(), [](char c) { return c != 0; });
    for (std::size_t e = 0; e < config.epsilon_grid.size(); ++e) {
        std::size_t conv = 0, far = 0;
        double occ = 0.0;
        for (const auto& r : result.replicas) {
            conv += r.verdicts[e] == Verdict::Converged;
            far += r.far_at_end[e];
            occ += r.occupancy[e];
        }
        AggregateVerdict a;
        a.epsilon = config.epsilon_grid[e];
        a.converged = wilson_interval(conv, count);
        a.far_at_end = wilson_interval(far, count);
        a.mean_occupancy = occ / static_cast<double>(count);
        a.implication_holds = a.converged.point <= 1.0 - a.far_at_end.point + 1e-12;
        result.aggregates.push_back(a);
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (!options.write_files) return result;

    const std::filesystem::path dir(config.outputs);
    std::string series_csv = std::string(kSeriesHeader) + "\n";
    std::string summary_csv = std::string(kSummaryHeader) + "\n";
    for (const auto& r : result.replicas) {
        series_csv += r.csv_rows;
        for (std::size_t e = 0; e < config.epsilon_grid.size(); ++e) {
            summary_csv += std::to_string(r.replica) + "," + std::to_string(r.stream_index) + "," +
                           format_double(config.epsilon_grid[e]) + "," + verdict_name(r.verdicts[e]) + "," +
                           format_double(r.occupancy[e]) + "," + format_double(r.terminal_rho) + "\n";
        }
    }
    write_text_file(dir / "series.csv", series_csv);
    write_text_file(dir / "summary.csv", summary_csv);

    nlohmann::json m;
    m["config"] = config_json(config);
    m["artifact_version"] = kVersion;
    m["kernels"] = std::string(kernels::isa_name(kernels::active_isa()));
    m["init_normalized"] = result.any_init_normalized;
    m["wall_clock_seconds"] = result.wall_seconds;
    m["threads"] = result.threads_used;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : result.replicas)
        reps.push_back({{"replica", r.replica}, {"stream_index", r.stream_index}, {"terminal_rho", r.terminal_rho}});
    m["replicas"] = reps;
    nlohmann::json aggs = nlohmann::json::array();
    for (const auto& a : result.aggregates)
        aggs.push_back({{"epsilon", a.epsilon},
                        {"converged_fraction", a.converged.point},
                        {"converged_ci95", {a.converged.lower, a.converged.upper}},
                        {"far_at_end_fraction", a.far_at_end.point},
                        {"mean_occupancy", a.mean_occupancy},
                        {"strong_implies_weak", a.implication_holds}});
    m["aggregate_verdicts"] = aggs;
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
    return result;
}

}  // namespace polarsim::harness
