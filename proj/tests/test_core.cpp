#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "calolab/core.hpp"
#include "calolab/report.hpp"

using namespace calolab;

TEST_CASE("philox known-answer vectors")
{
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    const auto ones = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
}

TEST_CASE("noise stream moments")
{
    NoiseStream rng = spawn_noise_stream(7, 3);
    const int n = 200000;
    double s1 = 0, s2 = 0, re = 0, im = 0, cross = 0, u = 0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
        const cplx z = rng.complex_normal();
        re += z.real() * z.real();
        im += z.imag() * z.imag();
        cross += z.real() * z.imag();
        const double v = rng.uniform();
        CHECK_UNARY(v > 0.0 && v < 1.0);
        u += v;
    }
    CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 0.015);
    CHECK(std::abs(re / n - 1.0) < 0.015);
    CHECK(std::abs(im / n - 1.0) < 0.015);
    CHECK(std::abs(cross / n) < 0.015);
    CHECK(std::abs(u / n - 0.5) < 0.005);
}

TEST_CASE("streams are reproducible and distinct")
{
    NoiseStream a = spawn_noise_stream(11, 0), b = spawn_noise_stream(11, 0), c = spawn_noise_stream(11, 1);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        differs = differs || x != c.normal();
    }
    CHECK(differs);

    NoiseStream d = spawn_noise_stream(5, 2);
    d.normal();
    const auto pos = d.position();
    const double next = d.uniform();
    d.seek(pos);
    CHECK(d.uniform() == next);
}

TEST_CASE("unit normalization keeps the length scales")
{
    PhysParams p;
    p.m = 2.5;
    p.omega = 0.8;
    p.theta = 0.3;
    p.hbar = 1.7;
    const PhysParams q = normalize_units(p);
    CHECK(q.normalized());
    CHECK(q.omega == p.omega);
    CHECK(q.ell_theta() == doctest::Approx(p.ell_theta()).epsilon(1e-14));
    CHECK(q.ell_hbar() == doctest::Approx(p.ell_hbar()).epsilon(1e-14));
    p.hbar = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("config parsing")
{
    std::istringstream in("# comment\n m = 2\n\nhbar=0.5 # trailing\n");
    const auto cfg = parse_config(in);
    CHECK(cfg.size() == 2);
    const PhysParams p = params_from_config(cfg);
    CHECK(p.m == 2.0);
    CHECK(p.hbar == 0.5);
    CHECK(p.theta == 1.0);

    std::istringstream bad("m 2\n");
    CHECK_THROWS_AS(parse_config(bad), ValidationError);
    CHECK_THROWS_AS(config_number({{"m", "2x"}}, "m", 1.0), ValidationError);
    CHECK_THROWS_AS(params_from_config({{"omega", "-1"}}), ValidationError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/calolab.cfg"), ValidationError);
}

TEST_CASE("pairwise sum")
{
    std::vector<double> x(1001);
    std::iota(x.begin(), x.end(), 0.0);
    CHECK(pairwise_sum(x.data(), x.size()) == 500500.0);
    std::vector<cplx> z(7, cplx(1.0, -2.0));
    CHECK(pairwise_sum(z.data(), z.size()) == cplx(7.0, -14.0));
    CHECK(pairwise_sum(x.data(), 0) == 0.0);
}

TEST_CASE("parallel_for visits each index once")
{
    for (int workers : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(97);
        parallel_for(97, workers, [&](int i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
    CHECK_THROWS(parallel_for(10, 4, [](int i) {
        if (i == 5) throw std::runtime_error("boom");
    }));
}

TEST_CASE("run records")
{
    PhysParams p;
    CHECK(make_run_id(1, p, "x") == make_run_id(1, p, "x"));
    CHECK(make_run_id(1, p, "x") != make_run_id(2, p, "x"));
    CHECK(make_run_id(1, p, "x").size() == 16);
    CHECK(timestamp_now(true) == "1970-01-01T00:00:00Z");

    RunRecord r;
    r.seed = 4;
    r.command = "test";
    r.add("a", 1.5);
    r.add("b", NAN);
    const auto j = nlohmann::json::parse(r.to_json_line());
    CHECK(j["seed"] == 4);
    CHECK(j["observables"][0]["value"] == 1.5);
    CHECK(j["observables"][1]["value"].is_null());
}

TEST_CASE("report writers")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "calolab_test_core";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "r.jsonl").string();
    RunRecord r;
    r.command = "x";
    emit_report({r, r}, path);
    emit_report({r}, path);
    std::ifstream in(path);
    int lines = 0;
    for (std::string s; std::getline(in, s);) ++lines;
    CHECK(lines == 3);

    CsvTable t({"a", "b"});
    t.add_row({"1", "x,y"});
    CHECK(t.str() == "a,b\n1,\"x,y\"\n");
    CHECK_THROWS(t.add_row({"1"}));

    CHECK(fmt_num(0.1) == "0.1");
    CHECK(std::strtod(fmt_num(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
    fs::remove_all(dir);
}
