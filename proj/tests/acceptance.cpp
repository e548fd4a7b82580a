// Runs every suite once and prints one PASS/FAIL line per acceptance criterion.
// Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "polarsim/harness/run.hpp"
#include "polarsim/harness/suites.hpp"

using namespace polarsim::harness;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string label;
    /// (suite, line id) pairs that must all pass
    std::vector<std::pair<std::string, std::string>> lines;
};

/// Every CSV file under `dir`, keyed by path relative to it.
std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            out[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
    return out;
}

}  // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "polarsim-acceptance";
    fs::remove_all(root);

    std::map<std::string, SuiteReport> reports;
    for (const auto& name : suite_names()) {
        SuiteOptions opts;
        opts.out = root / "workers-1";
        opts.threads = 1;
        reports[name] = run_suite(name, opts);
        std::cout << reports[name].render() << std::flush;
    }

    const std::vector<Criterion> criteria = {
        {"1 Signed HJMR strongly polarizes (Haar and tilted issues, >= 99% Converged)",
         {{"signed-hjmr", "haar"}, {"signed-hjmr", "tilted"}, {"signed-hjmr", "strong-implies-weak"}}},
        {"2 Party model with an irreducible cycle strongly polarizes (>= 97% Converged)",
         {{"party", "irreducible"}, {"party", "cycle"}, {"party", "strong-implies-weak"}}},
        {"3 Orthonormal HJMR polarizes weakly but not strongly",
         {{"ortho-weak-not-strong", "weak-decay"},
          {"ortho-weak-not-strong", "not-strong-T1e4"},
          {"ortho-weak-not-strong", "not-strong-T1e5"}}},
        {"4 Orthonormal HJMR matches its closed form and ignores issue order",
         {{"ortho-weak-not-strong", "closed-form"}, {"ortho-weak-not-strong", "closed-form-permutation"}}},
        {"5 Balls-in-bins tie probability matches the binomial law and decays like t^(-1/2)",
         {{"ortho-weak-not-strong", "tie-gap-t100"}, {"ortho-weak-not-strong", "tie-gap-exponent"}}},
        {"6 Geometric lemma property checks all hold, within five minutes", {}},
        {"7 Each clustering is equally likely and consensus has probability 1/8",
         {{"consensus-remark", "uniform-clusterings"},
          {"consensus-remark", "consensus-fraction"},
          {"consensus-remark", "strong-implies-weak"}}},
    };

    bool all = true;
    std::vector<std::string> summary;
    for (const auto& c : criteria) {
        bool ok = true;
        std::string detail;
        if (c.lines.empty()) {
            const auto& rep = reports.at("lemma-checks");
            ok = rep.passed();
            for (const auto& l : rep.lines)
                if (!l.passed) detail += " failed " + l.id + ";";
            detail += " " + rep.find("runtime")->detail;
        }
        for (const auto& [suite, id] : c.lines) {
            const CriterionLine* l = reports.at(suite).find(id);
            const bool line_ok = l != nullptr && l->passed;
            ok = ok && line_ok;
            detail += " " + id + (line_ok ? " ok" : " FAILED") + (l ? " (" + l->detail + ");" : ";");
        }
        all = all && ok;
        summary.push_back(std::string(ok ? "PASS" : "FAIL") + " criterion " + c.label + ":" + detail);
    }

    // 8: rerun two suites with eight workers and compare every CSV byte
    {
        std::string detail;
        bool ok = true;
        for (const char* name : {"signed-hjmr", "party"}) {
            SuiteOptions opts;
            opts.out = root / "workers-8";
            opts.threads = 8;
            run_suite(name, opts);
        }
        const auto one = csv_files(root / "workers-1");
        const auto eight = csv_files(root / "workers-8");
        std::size_t compared = 0;
        for (const auto& [path, bytes] : eight) {
            const auto it = one.find(path);
            const bool same = it != one.end() && it->second == bytes;
            ok = ok && same;
            ++compared;
            if (!same) detail += " " + path + " differs;";
        }
        ok = ok && compared > 0;
        detail += " " + std::to_string(compared) + " CSV files compared between 1 and 8 workers";
        all = all && ok;
        summary.push_back(std::string(ok ? "PASS" : "FAIL") +
                          " criterion 8 Reruns with the same seed give byte-identical CSV output for 1 and 8 workers:" +
                          detail);
    }

    std::cout << "\nacceptance summary\n";
    for (const auto& s : summary) std::cout << s << "\n";
    std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
    fs::remove_all(root);
    return all ? 0 : 1;
}
