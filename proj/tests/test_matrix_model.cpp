#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "calolab/calogero.hpp"
#include "calolab/matrix_model.hpp"

using namespace calolab;

namespace {

PhysParams params(double theta = 1.0)
{
    PhysParams p;
    p.theta = theta;
    return p;
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

}  // namespace

TEST_CASE("annihilation matrix entries")
{
    const double ell = 1.3;
    const Mat a = annihilation_matrix(5, ell);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double expect = (i + 1 == j) ? ell * std::sqrt(2.0 * j) : 0.0;
            CHECK(std::abs(a(i, j) - expect) < 1e-15);
        }
}

TEST_CASE("ground state commutator by hand")
{
    for (int N = 2; N <= 9; ++N) {
        const PhysParams p = params(0.7);
        const Mat a = annihilation_matrix(N, p.ell_theta());
        const Mat c = commutator(a, a.adjoint());
        for (int i = 0; i < N; ++i) {
            const double expect = i < N - 1 ? 2.0 * p.ell_theta2() : -2.0 * p.ell_theta2() * (N - 1);
            CHECK(std::abs(c(i, i) - expect) < 1e-13);
        }
        const ComplexMatrixState s = build_annihilation(N, p);
        CHECK(s.coulomb());
        CHECK(max_abs(constraint_residual(s)) < 1e-13);
        CHECK(max_abs(gauge_residual(s)) < 1e-13);
    }
}

TEST_CASE("mode coefficients against direct traces")
{
    const int N = 7;
    const double ell = 0.9;
    const Mat a = annihilation_matrix(N, ell);
    for (int n = 0; n < N; ++n) {
        const Mat an = matrix_power(a, n);
        const double tr = (an.adjoint() * an).trace().real();
        const double c = mode_coefficient(n, N, ell);
        CHECK(tr * (n + 1) * c * c == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("symmetrized products")
{
    Mat A(2, 2), B(2, 2);
    A << 1, 2, 0, 1;
    B << 0, 1, 3, 4;
    CHECK(max_abs(symmetrized_product({A, B}, {0, 1}) - (A * B + B * A) / 2.0) < 1e-15);
    const Mat expect = (A * A * B + A * B * A + B * A * A) / 3.0;
    CHECK(max_abs(symmetrized_product({A, B}, {0, 0, 1}) - expect) < 1e-14);
    CHECK(max_abs(symmetrized_product({A, B}, {1, 0, 0}) - expect) < 1e-14);
    CHECK(max_abs(word_product({A, B}, {1, 0, 1}) - B * A * B) < 1e-15);
    CHECK(max_abs(matrix_power(A, 3) - A * A * A) < 1e-15);
    CHECK(max_abs(matrix_power(A, 0) - Mat::Identity(2, 2)) < 1e-15);
}

TEST_CASE("diagonal gauge embedding")
{
    const PhysParams p = params(0.8);
    const std::vector<double> x = {-1.5, -0.2, 0.4, 1.3}, mom = {0.3, -0.1, 0.2, -0.4};
    const DiagonalGauge g = embed_diagonal_gauge(x, mom, p);
    const int N = 4;
    Mat target = Mat::Identity(N, N) - Mat::Constant(N, N, 1.0);  // 1 - N |u><u| with |u> = 1/sqrt(N)
    target *= cplx(0.0, p.theta);
    CHECK(max_abs(commutator(g.X, g.Y) - target) < 1e-13);
    for (int i = 0; i < N; ++i) CHECK(std::abs(g.X(i, i) - x[i]) < 1e-15);
    CHECK(max_abs(constraint_residual(g.state)) < 1e-13);
    CHECK_THROWS_AS(embed_diagonal_gauge({0.0, 0.0}, {0.0, 0.0}, p), NumericalError);
}

TEST_CASE("exact evolution keeps the constraint; the gauge needs the compensating rotation")
{
    const PhysParams p = params();
    const ComplexMatrixState a = build_annihilation(5, p);
    const ComplexMatrixState z = evolve_exact(a, 0.7);
    CHECK(max_abs(constraint_residual(z)) < 1e-13);
    // gauge residual of the phase-rotated ground state is 2i sin(phi)[a, a^dag]
    const Mat expect = cplx(0.0, 2.0 * std::sin(0.7)) * commutator(a.Z, a.Z.adjoint());
    CHECK(max_abs(gauge_residual(z) - expect) < 1e-12);
    const ComplexMatrixState g = evolve_gauge_fixed(a, 0.7);
    CHECK(max_abs(g.Z - a.Z) < 1e-14);
    CHECK(max_abs(evolve_exact(a, 2.0 * std::numbers::pi).Z - a.Z) < 1e-13);
}

TEST_CASE("invariants and spectrum generators under evolution")
{
    const PhysParams p = params();
    NoiseStream rng = spawn_noise_stream(3, 0);
    const ParticleState s = random_admissible_state(4, rng, p);
    const ComplexMatrixState z = embed_diagonal_gauge(s.x, s.p, p).state;
    CHECK(classical_invariant(z, 1) * p.omega / 2.0 == doctest::Approx(hamiltonian(s)).epsilon(1e-12));
    const double t = 0.37;
    const ComplexMatrixState zt = evolve_exact(z, t);
    for (int n = 1; n <= 3; ++n) {
        CHECK(classical_invariant(zt, n) == doctest::Approx(classical_invariant(z, n)).epsilon(1e-12));
        const cplx expect = spectrum_generator(z, n) * std::polar(1.0, -n * t);
        CHECK(std::abs(spectrum_generator(zt, n) - expect) < 1e-12);
    }
}

TEST_CASE("projection and multipliers")
{
    const PhysParams p = params();
    const int N = 4;
    NoiseStream rng = spawn_noise_stream(9, 0);
    ComplexMatrixState s = build_annihilation(N, p);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s.Z(i, j) += 0.02 * rng.complex_normal();
    CHECK(max_abs(constraint_residual(s)) > 1e-3);
    const SurfaceProjection proj = project_to_surface(s, 1e-12);
    CHECK(max_abs(constraint_residual(proj.state)) < 1e-11);
    CHECK(max_abs(gauge_residual(proj.state)) < 1e-11);
    CHECK(proj.distance > 0.0);

    Mat raw(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) raw(i, j) = rng.complex_normal();
    const MultiplierSolution sol = solve_multipliers(proj.state, raw);
    CHECK(max_abs(constraint_rate(sol.state, sol.velocity)) < 1e-9);
    CHECK(max_abs(gauge_rate(sol.state, sol.velocity)) < 1e-9);
}

TEST_CASE("constraint algebra")
{
    const ConstraintAlgebraReport r = constraint_algebra(build_annihilation(4, params()));
    CHECK(r.antisymmetry < 1e-12);
    CHECK(r.interior_remainder < 1e-12);
    CHECK(r.boundary_mismatch < 1e-12);
}

TEST_CASE("first-order classical velocity around the ground state")
{
    const PhysParams p = params();
    const int N = 6;
    const Mat a = annihilation_matrix(N, p.ell_theta());
    for (int n = 1; n <= 3; ++n) {
        const double c = mode_coefficient(n, N, p.ell_theta());
        const Mat V = c * matrix_power(a.adjoint(), n);
        auto beta = [&](double eps) {
            ComplexMatrixState s = build_annihilation(N, p);
            s.Z += eps * V;
            const MultiplierSolution sol = solve_multipliers(s, cplx(0.0, p.omega) * s.Z);
            return cplx(n + 1) * c * (matrix_power(a, n) * sol.velocity).trace() / eps;
        };
        const cplx richardson = 2.0 * beta(5e-4) - beta(1e-3);
        CHECK(std::abs(richardson - cplx(0.0, p.omega * (n + 1))) < 1e-6);
    }
}
