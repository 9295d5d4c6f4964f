#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace calolab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double value = 0.0;      // the measured quantity compared against threshold
    double threshold = 0.0;
    std::string detail;
    std::map<std::string, double> observables;
    std::map<std::string, std::string> artifacts;  // file name -> content
    double seconds = 0.0;    // wall time; never written to artifacts
};

struct AcceptanceOptions {
    bool quick = false;
    std::uint64_t seed = 20240615;
    int workers = 1;
    std::set<int> skip;
    std::function<void(const CriterionResult&)> on_result;  // called as each criterion finishes
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

// One line per criterion: "PASS [01] name: value=... threshold=... | detail".
std::string format_result(const CriterionResult& r);

// Writes acceptance.jsonl, acceptance.csv and the per-criterion artifacts under dir.
void write_acceptance_artifacts(const std::vector<CriterionResult>& results, const std::string& dir, std::uint64_t seed,
                                bool quick);

}  // namespace calolab
