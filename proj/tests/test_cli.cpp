#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "calolab/cli.hpp"

using namespace calolab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args)
{
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("calolab_cli_" + name);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("help and parse errors")
{
    const Run h = cli({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("verify-all") != std::string::npos);
    const fs::path d = scratch("bad");
    CHECK(cli({"matrix", "check-constraints", "--bogus", "--out", d.string()}).code == 1);
    CHECK(cli({}).code == 1);
    CHECK(cli({"matrix"}).code == 1);
    CHECK_FALSE(fs::exists(d));
}

TEST_CASE("invalid values write nothing")
{
    const fs::path d = scratch("invalid");
    CHECK(cli({"matrix", "evolve", "--n", "1", "--out", d.string()}).code == 1);
    CHECK(cli({"fock", "spectrum", "--op", "i3", "--out", d.string()}).code == 1);
    CHECK(cli({"langevin", "modes", "--dtau", "1.0", "--out", d.string()}).code == 1);
    CHECK(cli({"matrix", "evolve", "--hbar", "-1", "--out", d.string()}).code == 1);
    CHECK(cli({"verify-all", "--skip", "14", "--out", d.string()}).code == 1);
    CHECK_FALSE(fs::exists(d));
}

TEST_CASE("config files")
{
    const fs::path d = scratch("config");
    fs::create_directories(d);
    const fs::path cfg = d / "run.cfg";
    std::ofstream(cfg) << "theta = 2\nseed = 17\nbogus = 1\n";
    const fs::path out = d / "out";
    const Run r = cli({"--config", cfg.string(), "matrix", "check-constraints", "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("bogus") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    std::ofstream(cfg) << "theta = 2\nseed = 17\n";
    CHECK(cli({"--config", cfg.string(), "matrix", "check-constraints", "--n", "5", "--out", out.string()}).code == 0);
    std::ifstream in(out / "matrix_constraints.jsonl");
    std::string line;
    std::getline(in, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["seed"] == 17);
    CHECK(j["params"]["theta"] == 2.0);
    CHECK(j["started_at"] == "1970-01-01T00:00:00Z");

    // command-line flags win over the file
    CHECK(cli({"--config", cfg.string(), "--seed", "3", "matrix", "check-constraints", "--out", out.string()}).code == 0);
    std::ifstream in2(out / "matrix_constraints.jsonl");
    std::getline(in2, line);
    CHECK(nlohmann::json::parse(line)["seed"] == 3);

    setenv("CALOLAB_CONFIG", cfg.string().c_str(), 1);
    CHECK(cli({"matrix", "invariants", "--out", out.string()}).code == 0);
    unsetenv("CALOLAB_CONFIG");
    std::ifstream in3(out / "matrix_invariants.jsonl");
    std::getline(in3, line);
    CHECK(nlohmann::json::parse(line)["seed"] == 17);
    fs::remove_all(d);
}

TEST_CASE("subcommands produce artifacts")
{
    const fs::path d = scratch("artifacts");
    const std::string out = d.string();
    CHECK(cli({"matrix", "evolve", "--n", "3", "--samples", "5", "--out", out}).code == 0);
    CHECK(cli({"calogero", "simulate", "--n", "3", "--samples", "5", "--out", out}).code == 0);
    CHECK(cli({"hydro", "droplet", "--n", "6", "--grid", "64", "--out", out}).code == 0);
    CHECK(cli({"hydro", "circulation", "--n", "10", "--mode", "2", "--grid", "128", "--out", out}).code == 0);
    CHECK(cli({"hydro", "vortices", "--k", "3", "--steps", "10", "--out", out}).code == 0);
    CHECK(cli({"fock", "spectrum", "--op", "i2", "--level", "4", "--n", "5", "--out", out}).code == 0);
    CHECK(cli({"fock", "virasoro", "--m", "2", "--n", "-2", "--lambda", "8", "--ratio", "2", "--out", out}).code == 0);
    CHECK(cli({"jack", "verify", "--level", "4", "--n", "6", "--out", out}).code == 0);
    CHECK(cli({"langevin", "modes", "--lattice", "4", "--trajectories", "10", "--tau-max", "12", "--out", out}).code == 0);
    CHECK(cli({"langevin", "matrix", "--n", "3", "--steps", "50", "--hbar", "1e-3", "--out", out}).code == 0);
    for (const char* f : {"matrix_evolve.csv", "calogero_trajectory.csv", "droplet_density.csv", "hydro_circulation.jsonl",
                          "vortices.csv", "fock_spectrum_i2.csv", "fock_virasoro.jsonl", "jack_eigenvectors.csv",
                          "langevin_modes.csv", "langevin_matrix.csv"})
        CHECK_MESSAGE(fs::exists(d / f), f);
    CHECK(slurp(d / "fock_spectrum_i2.csv").rfind("level,partition,eigenvalue,predicted,residual,degenerate,q2\n", 0) == 0);
    fs::remove_all(d);
}

TEST_CASE("repeated runs are byte identical")
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const auto& d : {a, b})
        CHECK(cli({"--seed", "9", "langevin", "modes", "--lattice", "4", "--trajectories", "8", "--tau-max", "12", "--out",
                   d.string()})
                  .code == 0);
    CHECK(slurp(a / "langevin_modes.csv") == slurp(b / "langevin_modes.csv"));
    CHECK(slurp(a / "langevin_modes.jsonl") == slurp(b / "langevin_modes.jsonl"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("verify-all reports failing criteria with exit code 2")
{
    const fs::path d = scratch("verify");
    const Run r = cli({"verify-all", "--quick", "--skip", "1,2,3,4,5,6,7,9,10,11,12,13", "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.out.find("[08]") != std::string::npos);
    CHECK(fs::exists(d / "acceptance.jsonl"));
    CHECK(fs::exists(d / "acceptance.csv"));
    CHECK(fs::exists(d / "i2_q2_fit.csv"));
    fs::remove_all(d);
}
