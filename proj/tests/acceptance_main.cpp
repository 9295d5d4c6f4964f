// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "calolab/acceptance.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"calolab acceptance suite"};
    calolab::AcceptanceOptions opt;
    std::vector<int> only, skip;
    std::string out;
    app.add_flag("--quick", opt.quick, "reduced sample sizes");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--workers", opt.workers, "worker threads");
    app.add_option("--only", only, "criterion ids to run")->delimiter(',');
    app.add_option("--skip", skip, "criterion ids to skip")->delimiter(',');
    app.add_option("--out", out, "also write artifacts to this directory");
    CLI11_PARSE(app, argc, argv);

    opt.skip.insert(skip.begin(), skip.end());
    if (!only.empty())
        for (int id = 1; id <= 13; ++id)
            if (std::find(only.begin(), only.end(), id) == only.end()) opt.skip.insert(id);
    opt.on_result = [](const calolab::CriterionResult& r) { std::cout << calolab::format_result(r) << std::endl; };

    const auto results = calolab::run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    if (!out.empty()) calolab::write_acceptance_artifacts(results, out, opt.seed, opt.quick);
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
