#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>

#include "calolab/langevin.hpp"

using namespace calolab;

namespace {

using CMat = Eigen::MatrixXcd;

// Site-space drift: -(f_{k+1} - f_{k-1}) / (2 dt) - n Omega f_k on a ring.
CMat drift_matrix(int M, double dt, int n, double omega)
{
    CMat A = CMat::Zero(M, M);
    for (int k = 0; k < M; ++k) {
        A(k, k) -= n * omega;
        A(k, (k + 1) % M) -= 1.0 / (2 * dt);
        A(k, (k + M - 1) % M) += 1.0 / (2 * dt);
    }
    return A;
}

CMat unvec(const Eigen::VectorXcd& v, int M) { return Eigen::Map<const CMat>(v.data(), M, M); }

Eigen::VectorXcd vec_identity(int M)
{
    CMat I = CMat::Identity(M, M);
    return Eigen::Map<Eigen::VectorXcd>(I.data(), M * M);
}

}  // namespace

TEST_CASE("drift eigenvalues diagonalize the lattice drift")
{
    EuclideanLattice lat;
    lat.M = 6;
    lat.dt = 0.2;
    const auto eig = drift_eigenvalues(lat, 2, 0.8);
    const CMat A = drift_matrix(6, 0.2, 2, 0.8);
    for (int j = 0; j < 6; ++j) {
        std::vector<cplx> wave(6);
        for (int k = 0; k < 6; ++k) wave[k] = std::polar(1.0, 2 * std::numbers::pi * j * k / 6);
        const auto d = mode_drift(wave, lat, 2, 0.8);
        for (int k = 0; k < 6; ++k) {
            CHECK(std::abs(d[k] - eig[j] * wave[k]) < 1e-13);
            cplx row = 0.0;
            for (int l = 0; l < 6; ++l) row += A(k, l) * wave[l];
            CHECK(std::abs(d[k] - row) < 1e-13);
        }
        const auto pd = partner_drift(wave, lat, 2, 0.8);
        for (int k = 0; k < 6; ++k) {
            cplx row = 0.0;
            for (int l = 0; l < 6; ++l) row += A(l, k) * wave[l];
            CHECK(std::abs(pd[k] - row) < 1e-13);
        }
    }
}

TEST_CASE("stationary covariances against dense Kronecker solves")
{
    PhysParams p;
    p.hbar = 0.7;
    EuclideanLattice lat;
    lat.M = 6;
    lat.dt = 0.3;
    const int n = 2, M = lat.M;
    const double h = 0.02, D = p.ell_hbar2() * n;
    const LyapunovOracle o = lyapunov_oracle(lat, n, p, h);
    const CMat A = drift_matrix(M, lat.dt, n, p.omega);
    const CMat I = CMat::Identity(M, M);
    const CMat II = CMat::Identity(M * M, M * M);

    // A C + C A^dag + 2 D = 0
    const CMat Lc = Eigen::kroneckerProduct(I, A).eval() + Eigen::kroneckerProduct(A.conjugate(), I).eval();
    const CMat Cc = unvec(Lc.fullPivLu().solve(-2.0 * D * vec_identity(M)), M);
    CHECK((Cc - o.conj_matrix(false)).norm() < 1e-11);

    // C = G C G^dag + 2 D h with G = 1 + h A
    const CMat G = I + h * A;
    const CMat Le = II - Eigen::kroneckerProduct(G.conjugate(), G).eval();
    const CMat Ce = unvec(Le.fullPivLu().solve(2.0 * D * h * vec_identity(M)), M);
    CHECK((Ce - o.conj_matrix(true)).norm() < 1e-10);
    CHECK(o.conj_site(true) == doctest::Approx(Ce.diagonal().real().mean()).epsilon(1e-12));

    // holomorphic pair: H = G H G + 2 D h
    const CMat Lh = II - Eigen::kroneckerProduct(G.transpose(), G).eval();
    const CMat H = unvec(Lh.fullPivLu().solve(2.0 * D * h * vec_identity(M)), M);
    for (int k = 0; k < M; ++k) CHECK(std::abs(o.holo_lag(k, true) - H(k, 0)) < 1e-11);
}

TEST_CASE("single-site oracle")
{
    PhysParams p;
    EuclideanLattice lat;
    const LyapunovOracle o = lyapunov_oracle(lat, 3, p, 0.01);
    // scalar recursion x' = (1 - 3 h) x + eta, <|eta|^2> = 2 D h
    const double g = 1.0 - 3 * 0.01;
    CHECK(o.conj_site(true) == doctest::Approx(2 * 3 * 0.01 / (1 - g * g)).epsilon(1e-13));
    CHECK(o.conj_site(false) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("decay fit")
{
    std::vector<double> v(20);
    for (int k = 0; k < 20; ++k) v[k] = 3.0 * std::exp(-1.7 * 0.1 * k);
    CHECK(fit_decay(v, 0.1, 8) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(std::isnan(fit_decay(v, 0.1, 1)));
    EuclideanLattice lat;
    lat.M = 64;
    lat.dt = 0.1;
    CHECK(decay_fit_lags(lat, 1, 1.0) == 15);
    CHECK(decay_fit_lags(lat, 4, 1.0) == 3);
}

TEST_CASE("mode simulation matches the oracle")
{
    PhysParams p;
    ModeConfig cfg;
    cfg.lattice.M = 8;
    cfg.lattice.dt = 0.2;
    cfg.n_max = 2;
    cfg.trajectories = 200;
    cfg.samples = 10;
    cfg.seed = 5;
    const ModeEnsemble e = mode_simulate(cfg, p);
    REQUIRE(e.modes.size() == 2);
    for (const auto& st : e.modes) {
        const LyapunovOracle o = lyapunov_oracle(cfg.lattice, st.n, p, cfg.dtau);
        CHECK(std::abs(st.conj_cov.mean - o.conj_site(true)) < 4 * st.conj_cov.se);
        CHECK(std::abs(st.holo_cov.mean - o.holo_lag(0, true).real()) < 4 * st.holo_cov.se);
    }
    CHECK(std::abs(e.cross_23.mean) < 5 * std::max(e.cross_23.se, 1e-12));

    cfg.workers = 3;
    const ModeEnsemble again = mode_simulate(cfg, p);
    CHECK(again.modes[0].conj_cov.mean == e.modes[0].conj_cov.mean);
}

TEST_CASE("configuration validation")
{
    PhysParams p;
    ModeConfig cfg;
    cfg.lattice.M = 16;
    cfg.lattice.dt = 0.01;
    cfg.dtau = 0.05;
    CHECK_THROWS_AS(cfg.validate(p), ValidationError);
    cfg.dtau = 1e-4;
    CHECK_NOTHROW(cfg.validate(p));
    cfg.lattice.periodic = false;
    CHECK_THROWS_AS(cfg.validate(p), ValidationError);
}

TEST_CASE("matrix noise and its projection")
{
    PhysParams p;
    p.hbar = 0.5;
    const int N = 3, draws = 40000;
    NoiseStream rng = spawn_noise_stream(3, 0);
    double var = 0.0;
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(N, N);
    for (int d = 0; d < draws; ++d) {
        const Mat xi = matrix_noise(N, p, 0.1, rng);
        var += std::norm(xi(0, 1));
        const auto m = project_noise(xi, p);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) cov(i, j) += m[i] * std::conj(m[j]);
    }
    CHECK(var / draws == doctest::Approx(2 * p.ell_hbar2() * 0.1).epsilon(0.03));
    cov /= double(draws);
    for (int i = 0; i < N; ++i) {
        CHECK(cov(i, i).real() == doctest::Approx(2 * p.ell_hbar2() * 0.1 * (i + 1)).epsilon(0.03));
        for (int j = 0; j < N; ++j)
            if (i != j) CHECK(std::abs(cov(i, j)) < 0.03 * cov(i, i).real());
    }
}

TEST_CASE("constrained matrix Langevin stays on the surface")
{
    PhysParams p;
    p.hbar = 1e-3;
    MatrixConfig cfg;
    cfg.steps = 300;
    cfg.dtau = 1e-3;
    cfg.seed = 2;
    cfg.record_every = 50;
    const MatrixFieldState a = matrix_simulate(3, p, cfg);
    CHECK(a.max_constraint < 1e-9);
    CHECK(a.max_gauge < 1e-9);
    CHECK(a.history.size() == 6);
    const MatrixFieldState b = matrix_simulate(3, p, cfg);
    CHECK((a.state.Z - b.state.Z).norm() == 0.0);
    CHECK(a.modes.size() == 3);
    const ComplexMatrixState s = build_annihilation(3, p);
    CHECK((matrix_drift(s) - cplx(0.0, p.omega) * s.Z).norm() < 1e-15);
}

TEST_CASE("noise projection picks out single modes")
{
    PhysParams p;
    p.theta = 0.8;
    const int N = 5;
    const Mat ad = annihilation_matrix(N, p.ell_theta()).adjoint();
    for (int m = 0; m < N; ++m) {
        const Mat xi = mode_coefficient(m, N, p.ell_theta()) * matrix_power(ad, m);
        const auto out = project_noise(xi, p);
        REQUIRE(out.size() == std::size_t(N));
        for (int n = 0; n < N; ++n) CHECK(std::abs(out[n] - (n == m ? 1.0 : 0.0)) < 1e-12);
    }

    NoiseStream rng = spawn_noise_stream(11, 0);
    const Mat x = matrix_noise(N, p, 0.1, rng), y = matrix_noise(N, p, 0.1, rng);
    const cplx s(0.3, -1.2);
    const auto px = project_noise(x, p), py = project_noise(y, p), pxy = project_noise(x + s * y, p);
    for (int n = 0; n < N; ++n) CHECK(std::abs(pxy[n] - px[n] - s * py[n]) < 1e-12);
}
