// polarsim command line: run a config file, run a named suite, or print the version.
// Exit codes: 0 success, 1 a suite criterion failed, 2 usage or config error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "polarsim/error.hpp"
#include "polarsim/harness/config.hpp"
#include "polarsim/harness/run.hpp"
#include "polarsim/harness/suites.hpp"
#include "polarsim/version.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int do_run(const std::string& path, std::size_t threads) {
    using namespace polarsim::harness;
    const ExperimentConfig config = load_config(path);
    RunOptions opts;
    opts.threads = threads;
    const RunResult r = run(config, opts);
    if (r.any_init_normalized)
        std::cerr << "warning: explicit initial vectors were not unit length and have been normalized\n";
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.1f", r.wall_seconds);
    std::cout << "experiment " << config.name << ": " << r.replicas.size() << " replicas, " << config.steps
              << " steps, " << r.threads_used << " threads, " << wall << " s\n";
    for (const auto& a : r.aggregates) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "  eps=%g: Converged %.4f [%.4f, %.4f], far at end %.4f, mean occupancy %.4f\n",
                      a.epsilon, a.converged.point, a.converged.lower, a.converged.upper, a.far_at_end.point,
                      a.mean_occupancy);
        std::cout << buf;
    }
    std::cout << "outputs in " << config.outputs << "\n";
    return 0;
}

int do_suite(const std::string& name, std::uint64_t seed, const std::string& out, std::size_t threads) {
    using namespace polarsim::harness;
    if (!is_suite(name)) {
        std::cerr << "unknown suite '" << name << "'; expected one of:";
        for (const auto& s : suite_names()) std::cerr << " " << s;
        std::cerr << "\n";
        return kExitUsage;
    }
    SuiteOptions opts;
    opts.seed = seed;
    opts.threads = threads;
    if (!out.empty()) opts.out = out;
    const SuiteReport rep = run_suite(name, opts);
    std::cout << rep.render();
    return rep.passed() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polarsim: opinion dynamics on the unit sphere"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t threads = 0;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    run_cmd->add_option("--config", config_path, "YAML config file")->required();
    run_cmd->add_option("--threads", threads, "Worker threads (default: POLARSIM_THREADS or all cores)");

    std::string suite_name;
    std::uint64_t seed = polarsim::harness::kDefaultSuiteSeed;
    std::string out;
    auto* suite_cmd = app.add_subcommand("suite", "Run a named acceptance suite");
    suite_cmd->add_option("name", suite_name, "Suite name")->required();
    suite_cmd->add_option("--seed", seed, "Master seed");
    suite_cmd->add_option("--out", out, "Directory for experiment outputs");
    suite_cmd->add_option("--threads", threads, "Worker threads (default: POLARSIM_THREADS or all cores)");

    auto* version_cmd = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*version_cmd) {
            std::cout << "polarsim " << polarsim::kVersion << "\n";
            return 0;
        }
        if (*run_cmd) return do_run(config_path, threads);
        return do_suite(suite_name, seed, out, threads);
    } catch (const polarsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const auto c = e.code();
        const bool usage = c == polarsim::ErrorCode::ConfigInvalid || c == polarsim::ErrorCode::IoError ||
                           c == polarsim::ErrorCode::InvalidArgument;
        return usage ? kExitUsage : kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
