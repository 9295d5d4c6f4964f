#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "calolab/phase_hydro.hpp"
#include "calolab/vortex.hpp"

using namespace calolab;

namespace {

constexpr double pi = std::numbers::pi;

PhysParams params(double theta = 1.0)
{
    PhysParams p;
    p.theta = theta;
    return p;
}

// Explicit low-lying oscillator states with exp(-x^2 / (2 l^2)).
double psi0(double x, double l) { return std::pow(pi * l * l, -0.25) * std::exp(-x * x / (2 * l * l)); }
double psi1(double x, double l) { return std::sqrt(2.0) * x / l * psi0(x, l); }

// 2 pi theta times the standard Wigner function, by direct quadrature.
double wigner_quadrature(double (*psi)(double, double), double x, double p, const PhysParams& par)
{
    const double l = par.ell_theta(), h = l / 200.0;
    double s = 0.0;
    for (double y = -12 * l; y <= 12 * l; y += h) s += psi(x + y / 2, l) * psi(x - y / 2, l) * std::cos(p * y / par.theta);
    return s * h;
}

}  // namespace

TEST_CASE("oscillator states")
{
    const double l = 0.8;
    CHECK(hermite_state(0, 0.3, l) == doctest::Approx(psi0(0.3, l)).epsilon(1e-14));
    CHECK(hermite_state(1, -0.7, l) == doctest::Approx(psi1(-0.7, l)).epsilon(1e-14));
    // orthonormality by trapezoid quadrature
    const int n = 12;
    std::vector<std::vector<double>> rows;
    const double h = 0.01;
    double g[n][n] = {};
    for (double x = -15; x <= 15; x += h) {
        const auto v = hermite_states(n, x, l);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g[i][j] += v[i] * v[j] * h;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK(std::abs(g[i][j] - (i == j)) < 1e-10);
}

TEST_CASE("closed-form diagonal Wigner functions")
{
    const PhysParams p = params(0.6);
    for (auto [x, k] : {std::pair{0.0, 0.0}, std::pair{0.4, -0.3}, std::pair{-0.9, 0.8}}) {
        CHECK(wigner_diagonal_closed_form(0, x, k, p) == doctest::Approx(wigner_quadrature(psi0, x, k, p)).epsilon(1e-9));
        CHECK(wigner_diagonal_closed_form(1, x, k, p) == doctest::Approx(wigner_quadrature(psi1, x, k, p)).epsilon(1e-9));
    }
    CHECK(wigner_diagonal_closed_form(0, 0.0, 0.0, p) == doctest::Approx(2.0));
}

TEST_CASE("grid Wigner transform")
{
    const PhysParams p = params(0.8);
    const int N = 5;
    const GridSpec g = droplet_grid(N, p, 96, 2.5);
    for (int n : {0, 3}) {
        Mat M = Mat::Zero(N, N);
        M(n, n) = 1.0;
        const GridField W = wigner_transform(M, p, g);
        double err = 0.0;
        for (int i = 0; i < g.nx; i += 7)
            for (int j = 0; j < g.np; j += 5)
                err = std::max(err, std::abs(W.at(i, j) - wigner_diagonal_closed_form(n, g.x(i), g.p(j), p)));
        CHECK(err < 1e-10);
        CHECK(W.integral().real() / (2 * pi * p.ell_theta2()) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("off-diagonal Wigner transform by direct quadrature")
{
    const PhysParams p = params(0.7);
    const double l = p.ell_theta();
    auto psi2 = [](double x, double l) { return (2 * x * x / (l * l) - 1) / std::sqrt(2.0) * psi0(x, l); };
    const Mat a = annihilation_matrix(3, l);
    const GridSpec g = droplet_grid(3, p, 24);
    const GridField A = wigner_transform(a, p, g);
    for (auto [i, j] : {std::pair{10, 13}, std::pair{5, 17}, std::pair{12, 12}}) {
        const double x = g.x(i), k = g.p(j), h = l / 400.0;
        cplx s = 0.0;
        for (double y = -14 * l; y <= 14 * l; y += h) {
            const double u0 = psi0(x + y / 2, l), u1 = psi1(x + y / 2, l);
            const double w1 = psi1(x - y / 2, l), w2 = psi2(x - y / 2, l);
            s += (a(0, 1) * u0 * w1 + a(1, 2) * u1 * w2) * std::polar(h, -k * y / p.theta);
        }
        CHECK(std::abs(A.at(i, j) - s) < 1e-9);
    }
}

TEST_CASE("droplet")
{
    const PhysParams p = params();
    const int N = 20;
    const DropletReport d = droplet_density(N, p, droplet_grid(N, p, 192));
    CHECK(d.trace == doctest::Approx(N).epsilon(1e-8));
    CHECK(d.plateau == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(d.edge_radius - d.expected_radius) < 0.05 * d.expected_radius);
    CHECK(d.tail_ratio < 1e-6);
    CHECK_THROWS_AS(droplet_density(1, p, droplet_grid(1, p, 32)), ValidationError);
}

TEST_CASE("deformation series and fields")
{
    const PhysParams p = params();
    const int N = 10;
    const double R = std::sqrt(2.0 * N);
    const DeformationSeries V = single_mode(2, 1e-3, N, p, 1e-3);
    CHECK(V.budget(p) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(V.within_budget(p));
    CHECK(std::abs(V(cplx(R, 0.0), p)) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK_THROWS_AS(single_mode(N, 1e-3, N, p, 1e-3), ValidationError);

    const GridSpec g = droplet_grid(N, p, 64);
    const VectorField d = displacement_field(V, p, g);
    const VectorField v = velocity_field(V, p, g);
    for (int k : {0, 100, 2000}) {
        CHECK(v.vx.values[k] == p.omega * d.vy.values[k]);
        CHECK(v.vy.values[k] == -p.omega * d.vx.values[k]);
    }
    // V ~ w: dR = eps (x, p) / R, so the divergence is uniform.
    const DeformationSeries V1 = single_mode(1, 1e-3, N, p, 1e-3);
    const GridField drho = density_perturbation(displacement_field(V1, p, g), p);
    CHECK(drho.at(20, 30).real() == doctest::Approx(-2e-3 / R / p.ell_theta2()).epsilon(1e-10));
}

TEST_CASE("circulation identity for a single mode")
{
    const PhysParams p = params();
    const int N = 20;
    const double R = std::sqrt(2.0 * N);
    const DeformationSeries V = single_mode(2, 1e-3, N, p, 1e-3);
    const CirculationReport c = circulation_check(V, p, droplet_grid(N, p, 256), 0.3 * R, 0.0, 0.3 * R);
    CHECK(c.budget_ok);
    CHECK(std::abs(c.enclosed_vorticity) > 0.0);
    CHECK(c.relative_error < 0.01);
}

TEST_CASE("vorticity requires zero net density change")
{
    const PhysParams p = params();
    GridSpec g;
    g.nx = g.np = 8;
    GridField f(g);
    f.at(2, 2) = 1.0;
    f.at(5, 5) = -1.0;
    const GridField w = vorticity_from_density(f, p);
    CHECK(w.at(2, 2).real() == doctest::Approx(p.theta / p.m));
    f.at(5, 5) = -0.5;
    CHECK_THROWS_AS(vorticity_from_density(f, p), ValidationError);
}

TEST_CASE("two vortices co-rotate at the Kirchhoff rate")
{
    VortexSet s;
    s.vortices = {{-0.5, 0.0, 2.0}, {0.5, 0.0, 2.0}};
    const auto u = vortex_velocity(s);
    // each vortex moves with Gamma / (2 pi d) perpendicular to the separation
    CHECK(std::abs(u[0]) < 1e-15);
    CHECK(std::abs(std::abs(u[1]) - 2.0 / (2 * pi)) < 1e-14);
    CHECK(u[1] == doctest::Approx(-u[3]));
    const double T = pi * pi;  // 2 pi^2 d^2 / Gamma per vortex
    const VortexSet half = kirchhoff_step(s, T / 2, 1e-13);
    CHECK(std::abs(half.vortices[0].x - 0.5) < 1e-9);
    CHECK(std::abs(half.vortices[1].x + 0.5) < 1e-9);
}

TEST_CASE("vortex invariants and collisions")
{
    NoiseStream rng = spawn_noise_stream(2, 0);
    VortexSet s = random_vortices(5, rng, 1.0, 0.2);
    const VortexInvariants a = vortex_invariants(s);
    const VortexInvariants b = vortex_invariants(kirchhoff_step(s, 0.3, 1e-13));
    CHECK(std::abs(a.energy - b.energy) < 1e-10);
    CHECK(std::abs(a.impulse_x - b.impulse_x) < 1e-10);
    CHECK(std::abs(a.angular - b.angular) < 1e-10);

    VortexSet pair;
    pair.vortices = {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(kirchhoff_step(pair, 0.1), NumericalError);
}
