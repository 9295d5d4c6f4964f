#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "calolab/calogero.hpp"

using namespace calolab;

namespace {

// Independent energy: kinetic + trap + theta^2 / (m d^2) per unordered pair.
double energy(const std::vector<double>& x, const std::vector<double>& p, const PhysParams& par)
{
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        e += p[i] * p[i] / (2.0 * par.m) + 0.5 * par.m * par.omega * par.omega * x[i] * x[i];
        for (std::size_t j = i + 1; j < x.size(); ++j) e += par.theta * par.theta / (par.m * std::pow(x[i] - x[j], 2));
    }
    return e;
}

ParticleState sample_state()
{
    ParticleState s;
    s.x = {-1.7, -0.3, 0.5, 1.5};
    s.p = {0.2, -0.4, 0.1, 0.1};
    s.params.m = 1.3;
    s.params.omega = 0.9;
    s.params.theta = 0.6;
    return s;
}

}  // namespace

TEST_CASE("hamiltonian matches the pair-sum energy")
{
    const ParticleState s = sample_state();
    CHECK(hamiltonian(s) == doctest::Approx(energy(s.x, s.p, s.params)).epsilon(1e-14));
    const double pair = hamiltonian(s) - hamiltonian(s, PairSum::ordered);
    CHECK(pair < 0.0);
}

TEST_CASE("equations of motion are Hamilton's equations")
{
    const ParticleState s = sample_state();
    const Derivative d = rhs(s);
    const double h = 1e-6;
    for (int i = 0; i < s.N(); ++i) {
        auto xp = s.x, xm = s.x, pp = s.p, pm = s.p;
        xp[i] += h;
        xm[i] -= h;
        pp[i] += h;
        pm[i] -= h;
        const double dHdx = (energy(xp, s.p, s.params) - energy(xm, s.p, s.params)) / (2 * h);
        const double dHdp = (energy(s.x, pp, s.params) - energy(s.x, pm, s.params)) / (2 * h);
        CHECK(d.dx[i] == doctest::Approx(dHdp).epsilon(1e-7));
        CHECK(d.dp[i] == doctest::Approx(-dHdx).epsilon(1e-7));
    }
    const Derivative free = rhs(s, TrapForce::omitted);
    for (int i = 0; i < s.N(); ++i)
        CHECK(free.dp[i] - d.dp[i] == doctest::Approx(s.params.m * s.params.omega * s.params.omega * s.x[i]));
}

TEST_CASE("two-particle equilibrium")
{
    PhysParams p;
    p.m = 2.0;
    p.omega = 0.5;
    p.theta = 0.8;
    const double r = equilibrium_separation(p);
    ParticleState s;
    s.x = {-r / 2, r / 2};
    s.p = {0.0, 0.0};
    s.params = p;
    const Derivative d = rhs(s);
    CHECK(std::abs(d.dp[0]) < 1e-14);
    CHECK(std::abs(d.dp[1]) < 1e-14);
    CHECK(r == doctest::Approx(std::sqrt(2.0) * p.ell_theta()).epsilon(1e-14));
}

TEST_CASE("isochronous orbits and energy conservation")
{
    PhysParams p;
    NoiseStream rng = spawn_noise_stream(42, 0);
    for (int N : {2, 3, 5}) {
        const ParticleState s0 = random_admissible_state(N, rng, p);
        const Trajectory tr = integrate(s0, 2.0 * std::numbers::pi / p.omega, 1e-12, 5);
        CHECK(tr.max_energy_drift < 1e-9);
        const ParticleState& s1 = tr.states.back();
        for (int i = 0; i < N; ++i) {
            CHECK(std::abs(s1.x[i] - s0.x[i]) < 1e-8);
            CHECK(std::abs(s1.p[i] - s0.p[i]) < 1e-8);
        }
    }
}

TEST_CASE("integrate_at samples the requested times")
{
    PhysParams p;
    NoiseStream rng = spawn_noise_stream(1, 0);
    const ParticleState s0 = random_admissible_state(3, rng, p);
    const Trajectory tr = integrate_at(s0, {0.0, 0.5, 1.25}, 1e-12);
    REQUIRE(tr.t.size() == 3);
    CHECK(tr.t[2] == 1.25);
    CHECK(tr.states[0].x == s0.x);
    const Trajectory direct = integrate(s0, 1.25, 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(direct.states.back().x[i] - tr.states[2].x[i]) < 1e-9);
}

TEST_CASE("admissible states")
{
    PhysParams p;
    NoiseStream rng = spawn_noise_stream(8, 1);
    for (int k = 0; k < 20; ++k) {
        const ParticleState s = random_admissible_state(6, rng, p, 1.5, 0.3);
        CHECK(std::is_sorted(s.x.begin(), s.x.end()));
        CHECK(s.min_gap() >= 0.3);
        double cx = 0, cp = 0;
        for (int i = 0; i < 6; ++i) {
            cx += s.x[i];
            cp += s.p[i];
        }
        CHECK(std::abs(cx) < 1e-12);
        CHECK(std::abs(cp) < 1e-12);
    }
}

TEST_CASE("coincident particles are rejected")
{
    ParticleState s = sample_state();
    s.x[1] = s.x[0];
    CHECK_THROWS_AS(rhs(s), NumericalError);
}
