#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace polarsim::harness {

struct CriterionLine {
    std::string id;
    /// plain-language statement of the claim being checked
    std::string claim;
    bool passed = false;
    std::string detail;
    /// reported but never fails the suite (negative controls)
    bool informational = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CriterionLine> lines;
    double seconds = 0.0;

    bool passed() const;
    const CriterionLine* find(const std::string& id) const;
    std::string render() const;
};

inline constexpr std::uint64_t kDefaultSuiteSeed = 20240917;

struct SuiteOptions {
    std::uint64_t seed = kDefaultSuiteSeed;
    /// experiment outputs go to <out>/<experiment name>/ when set
    std::optional<std::filesystem::path> out;
    /// 0 = POLARSIM_THREADS or hardware concurrency
    std::size_t threads = 0;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Throws InvalidArgument for an unknown name.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options = {});

/// The property checks behind the lemma-checks suite.
SuiteReport run_lemma_checks(const SuiteOptions& options);

}  // namespace polarsim::harness
