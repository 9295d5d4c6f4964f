#include "calolab/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace calolab {

namespace {

constexpr double pi = std::numbers::pi;

Estimate estimate(const std::vector<double>& per_trajectory)
{
    Estimate e;
    const std::size_t T = per_trajectory.size();
    if (T == 0) return e;
    e.mean = pairwise_sum(per_trajectory.data(), T) / T;
    if (T > 1) {
        std::vector<double> d(T);
        for (std::size_t i = 0; i < T; ++i) d[i] = (per_trajectory[i] - e.mean) * (per_trajectory[i] - e.mean);
        e.se = std::sqrt(pairwise_sum(d.data(), T) / (T - 1) / T);
    }
    return e;
}

struct TrajectoryResult {
    std::vector<double> conj, holo;             // per mode
    std::vector<std::vector<cplx>> lag;         // per mode, per lag
    double cross_re = 0.0, cross_im = 0.0;
    double first_half = 0.0, second_half = 0.0;
};

}  // namespace

void EuclideanLattice::validate() const
{
    if (M < 1) throw ValidationError("lattice needs M >= 1");
    if (!(dt > 0.0)) throw ValidationError("lattice spacing must be positive");
    if (!periodic) throw ValidationError("only periodic lattices are supported");
}

std::vector<cplx> drift_eigenvalues(const EuclideanLattice& lat, int n, double omega)
{
    lat.validate();
    std::vector<cplx> a(lat.M);
    for (int j = 0; j < lat.M; ++j) {
        const double th = 2.0 * pi * j / lat.M;
        a[j] = -cplx(n * omega, std::sin(th) / lat.dt);
    }
    return a;
}

std::vector<cplx> mode_drift(const std::vector<cplx>& f, const EuclideanLattice& lat, int n, double omega)
{
    const int M = lat.M;
    if (static_cast<int>(f.size()) != M) throw ValidationError("field size does not match the lattice");
    std::vector<cplx> d(M);
    for (int k = 0; k < M; ++k)
        d[k] = -(f[(k + 1) % M] - f[(k + M - 1) % M]) / (2.0 * lat.dt) - n * omega * f[k];
    return d;
}

std::vector<cplx> partner_drift(const std::vector<cplx>& f, const EuclideanLattice& lat, int n, double omega)
{
    const int M = lat.M;
    if (static_cast<int>(f.size()) != M) throw ValidationError("field size does not match the lattice");
    std::vector<cplx> d(M);
    for (int k = 0; k < M; ++k)
        d[k] = (f[(k + 1) % M] - f[(k + M - 1) % M]) / (2.0 * lat.dt) - n * omega * f[k];
    return d;
}

void ModeConfig::validate(const PhysParams& params) const
{
    lattice.validate();
    if (n_max < 1) throw ValidationError("n_max must be >= 1");
    if (!(dtau > 0.0)) throw ValidationError("dtau must be positive");
    if (trajectories < 1 || samples < 1) throw ValidationError("need at least one trajectory and one sample");
    if (!(burn_in >= 0.0) || !(stride > 0.0)) throw ValidationError("burn-in and stride must be non-negative / positive");
    double amax = 0.0;
    for (const cplx& a : drift_eigenvalues(lattice, n_max, params.omega)) amax = std::max(amax, std::abs(a));
    if (dtau >= 1.0 / amax) throw ValidationError("dtau exceeds the stability bound 1/|largest drift eigenvalue|");
}

ModeEnsemble mode_simulate(const ModeConfig& cfg, const PhysParams& params)
{
    params.validate();
    cfg.validate(params);
    const int M = cfg.lattice.M, nm = cfg.n_max;
    const double w = params.omega, lh2 = params.ell_hbar2();
    const long burn = std::lround(cfg.burn_in / (w * cfg.dtau));
    const long stride = std::max(1L, std::lround(cfg.stride / (w * cfg.dtau)));
    const long total = burn + stride * (cfg.samples - 1) + 1;

    std::vector<TrajectoryResult> res(cfg.trajectories);
    parallel_for(cfg.trajectories, cfg.workers, [&](int t) {
        TrajectoryResult& r = res[t];
        r.conj.assign(nm, 0.0);
        r.holo.assign(nm, 0.0);
        r.lag.assign(nm, std::vector<cplx>(M, 0.0));
        std::vector<NoiseStream> rng;
        for (int n = 1; n <= nm; ++n) rng.push_back(spawn_noise_stream(cfg.seed, std::uint64_t(t) * 1024 + n));
        std::vector<std::vector<cplx>> al(nm, std::vector<cplx>(M, 0.0)), ab = al;
        std::vector<cplx> eta(M);
        int taken = 0;
        for (long step = 1; step <= total; ++step) {
            for (int n = 1; n <= nm; ++n) {
                auto& x = al[n - 1];
                auto& y = ab[n - 1];
                const double amp = std::sqrt(lh2 * n * cfg.dtau);
                for (int k = 0; k < M; ++k) eta[k] = amp * rng[n - 1].complex_normal();
                // Both drifts read the pre-step field; the update is written in place
                // after the neighbours of each site have been consumed.
                const double c = 1.0 - cfg.dtau * n * w, h = cfg.dtau / (2.0 * cfg.lattice.dt);
                const cplx x0 = x[0], y0 = y[0];
                cplx xprev = x[M - 1], yprev = y[M - 1];
                double norm = 0.0;
                for (int k = 0; k < M; ++k) {
                    const cplx xn = k + 1 < M ? x[k + 1] : x0, yn = k + 1 < M ? y[k + 1] : y0;
                    const cplx xk = x[k], yk = y[k];
                    x[k] = c * xk - h * (xn - xprev) + eta[k];
                    y[k] = c * yk + h * (yn - yprev) + std::conj(eta[k]);
                    xprev = xk;
                    yprev = yk;
                    norm += std::norm(x[k]);
                }
                if (!std::isfinite(norm) || norm / M > cfg.blowup * lh2 / w)
                    throw NumericalError(NumericalError::Kind::instability, "mode trajectory diverged; reduce dtau");
            }
            if (step > burn && (step - burn - 1) % stride == 0) {
                for (int n = 0; n < nm; ++n) {
                    double c = 0.0;
                    cplx h = 0.0;
                    for (int k = 0; k < M; ++k) {
                        c += std::norm(al[n][k]);
                        h += al[n][k] * ab[n][k];
                    }
                    r.conj[n] += c / M;
                    r.holo[n] += h.real() / M;
                    for (int lag = 0; lag < M; ++lag) {
                        cplx s = 0.0;
                        for (int k = 0; k < M; ++k) s += al[n][(k + lag) % M] * ab[n][k];
                        r.lag[n][lag] += s / double(M);
                    }
                    if (n == 0) (taken < cfg.samples / 2 ? r.first_half : r.second_half) += c / M;
                }
                if (nm >= 3) {
                    cplx s = 0.0;
                    for (int k = 0; k < M; ++k) s += al[1][k] * std::conj(al[2][k]);
                    r.cross_re += s.real() / M;
                    r.cross_im += s.imag() / M;
                }
                ++taken;
            }
        }
        for (int n = 0; n < nm; ++n) {
            r.conj[n] /= taken;
            r.holo[n] /= taken;
            for (auto& v : r.lag[n]) v /= double(taken);
        }
        r.cross_re /= taken;
        r.cross_im /= taken;
        const int h1 = cfg.samples / 2, h2 = taken - h1;
        r.first_half = h1 ? r.first_half / h1 : 0.0;
        r.second_half = h2 ? r.second_half / h2 : 0.0;
    });

    ModeEnsemble out;
    out.config = cfg;
    out.steps = total;
    const int T = cfg.trajectories;
    std::vector<double> buf(T);
    auto collect = [&](auto get) {
        for (int t = 0; t < T; ++t) buf[t] = get(res[t]);
        return estimate(buf);
    };
    for (int n = 1; n <= nm; ++n) {
        ModeStatistics st;
        st.n = n;
        st.conj_cov = collect([&](const TrajectoryResult& r) { return r.conj[n - 1]; });
        st.holo_cov = collect([&](const TrajectoryResult& r) { return r.holo[n - 1]; });
        std::vector<double> lag_means(M);
        for (int lag = 0; lag < M; ++lag) {
            st.holo_lag.push_back(collect([&](const TrajectoryResult& r) { return r.lag[n - 1][lag].real(); }));
            lag_means[lag] = st.holo_lag.back().mean;
            const Estimate im = collect([&](const TrajectoryResult& r) { return r.lag[n - 1][lag].imag(); });
            st.holo_lag_imag_max = std::max(st.holo_lag_imag_max, std::abs(im.mean));
        }
        if (M >= 4) {
            st.fit_lags = decay_fit_lags(cfg.lattice, n, w);
            st.decay_rate = fit_decay(lag_means, cfg.lattice.dt, st.fit_lags);
        }
        out.modes.push_back(std::move(st));
    }
    if (nm >= 3) {
        out.cross_23 = collect([](const TrajectoryResult& r) { return r.cross_re; });
        out.cross_23_imag = collect([](const TrajectoryResult& r) { return r.cross_im; });
    }
    out.drift_check = collect([](const TrajectoryResult& r) { return r.first_half - r.second_half; });
    return out;
}

double LyapunovOracle::conj_site(bool em) const
{
    const auto& c = em ? conj_em : conj_continuous;
    return pairwise_sum(c.data(), c.size()) / double(c.size());
}

cplx LyapunovOracle::holo_lag(int k, bool em) const
{
    const auto& g = em ? holo_em : holo_continuous;
    const int M = lattice.M;
    std::vector<cplx> terms(M);
    for (int j = 0; j < M; ++j) terms[j] = g[j] * std::polar(1.0, 2.0 * pi * j * k / M);
    return pairwise_sum(terms.data(), terms.size()) / double(M);
}

double LyapunovOracle::decay_rate(int kmax, bool em) const
{
    std::vector<double> v(lattice.M);
    for (int k = 0; k < lattice.M; ++k) v[k] = holo_lag(k, em).real();
    return fit_decay(v, lattice.dt, kmax);
}

Eigen::MatrixXcd LyapunovOracle::conj_matrix(bool em) const
{
    const int M = lattice.M;
    const auto& c = em ? conj_em : conj_continuous;
    Eigen::MatrixXcd U(M, M);
    for (int t = 0; t < M; ++t)
        for (int j = 0; j < M; ++j) U(t, j) = std::polar(1.0 / std::sqrt(double(M)), 2.0 * pi * j * t / M);
    Eigen::VectorXcd d(M);
    for (int j = 0; j < M; ++j) d(j) = c[j];
    return U * d.asDiagonal() * U.adjoint();
}

LyapunovOracle lyapunov_oracle(const EuclideanLattice& lat, int n, const PhysParams& params, double dtau)
{
    params.validate();
    if (n < 1) throw ValidationError("mode index must be >= 1");
    LyapunovOracle o;
    o.n = n;
    o.lattice = lat;
    o.diffusion = params.ell_hbar2() * n;
    o.eigen = drift_eigenvalues(lat, n, params.omega);
    const double D = o.diffusion;
    for (const cplx& a : o.eigen) {
        if (!(a.real() < 0.0)) throw NumericalError(NumericalError::Kind::instability, "drift is not stable");
        const cplx g = 1.0 + a * dtau;
        const double conj_den = 1.0 - std::norm(g);
        const cplx holo_den = 1.0 - g * g;
        if (!(conj_den > 0.0)) throw NumericalError(NumericalError::Kind::instability, "Euler-Maruyama recursion is unstable");
        o.conj_continuous.push_back(-D / a.real());
        o.conj_em.push_back(2.0 * D * dtau / conj_den);
        o.holo_continuous.push_back(-D / a);
        o.holo_em.push_back(2.0 * D * dtau / holo_den);
    }
    return o;
}

int decay_fit_lags(const EuclideanLattice& lat, int n, double omega)
{
    const int k = static_cast<int>(std::floor(1.5 / (n * omega * lat.dt)));
    return std::max(2, std::min(k, lat.M / 2));
}

double fit_decay(const std::vector<double>& v, double dt, int kmax)
{
    if (kmax < 2 || kmax >= static_cast<int>(v.size())) return NAN;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 1; k <= kmax; ++k) {
        if (!(v[k] > 0.0)) return NAN;
        const double y = std::log(v[k]);
        sx += k;
        sy += y;
        sxx += double(k) * k;
        sxy += k * y;
    }
    const double m = kmax;
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -slope / dt;
}

std::vector<cplx> project_noise(const Mat& xi, const PhysParams& params)
{
    const int N = static_cast<int>(xi.rows());
    if (N < 1 || xi.cols() != N) throw ValidationError("noise matrix must be square");
    const double ell = params.ell_theta();
    const Mat a = annihilation_matrix(N, ell);
    std::vector<cplx> out(N);
    Mat an = Mat::Identity(N, N);
    for (int n = 0; n < N; ++n) {
        out[n] = double(n + 1) * mode_coefficient(n, N, ell) * (an * xi).trace();
        an = an * a;
    }
    return out;
}

Mat matrix_noise(int N, const PhysParams& params, double dtau, NoiseStream& rng)
{
    const double amp = std::sqrt(params.ell_hbar2() * dtau);
    Mat xi(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) xi(i, j) = amp * rng.complex_normal();
    return xi;
}

Mat matrix_drift(const ComplexMatrixState& s) { return cplx(0.0, s.params.omega) * s.Z; }

MatrixFieldState matrix_simulate(int N, const PhysParams& params, const MatrixConfig& cfg)
{
    if (N < 2 || N > 8) throw ValidationError("matrix Langevin supports 2 <= N <= 8");
    if (cfg.steps < 0 || !(cfg.dtau > 0.0)) throw ValidationError("bad step configuration");
    MatrixFieldState out;
    out.state = build_annihilation(N, params);
    const Mat a0 = out.state.Z;
    NoiseStream rng = spawn_noise_stream(cfg.seed, 0);
    MultiplierOptions opt;
    opt.tol = 1e-9;

    std::function<void(ComplexMatrixState&, double, int, MatrixStepRecord&)> advance =
        [&](ComplexMatrixState& s, double dt, int depth, MatrixStepRecord& rec) {
            const Mat xi = matrix_noise(N, params, dt, rng);
            try {
                const Mat drift = matrix_drift(s) * dt;
                const MultiplierSolution sol = solve_multipliers(s, drift + xi, opt);
                if (cfg.decomposition) {
                    const MultiplierSolution cl = solve_multipliers(s, drift, opt);
                    rec.classical_norm = cl.velocity.norm();
                    rec.quantum_norm = (sol.velocity - cl.velocity).norm();
                }
                ComplexMatrixState next = s;
                next.Z += sol.velocity;
                next.on_shell = false;
                const double r = std::max(max_abs(constraint_residual(next)), max_abs(gauge_residual(next)));
                if (r > cfg.residual_tol) {
                    next = project_to_surface(next, 1e-12).state;
                    rec.corrected = true;
                    ++out.corrections;
                }
                next.on_shell = true;
                rec.multiplier_norm = std::max(rec.multiplier_norm, sol.lambda.norm() + sol.nu.norm());
                s = std::move(next);
            } catch (const NumericalError& e) {
                if (e.kind() == NumericalError::Kind::collision || depth >= cfg.max_retries) throw;
                ++out.rejected;
                advance(s, dt / 2, depth + 1, rec);
                advance(s, dt / 2, depth + 1, rec);
                rec.dtau = std::min(rec.dtau, dt / 2);
            }
        };

    for (int step = 1; step <= cfg.steps; ++step) {
        MatrixStepRecord rec;
        rec.step = step;
        rec.dtau = cfg.dtau;
        advance(out.state, cfg.dtau, 0, rec);
        rec.constraint = max_abs(constraint_residual(out.state));
        rec.gauge = max_abs(gauge_residual(out.state));
        out.max_constraint = std::max(out.max_constraint, rec.constraint);
        out.max_gauge = std::max(out.max_gauge, rec.gauge);
        if (cfg.record_every > 0 && step % cfg.record_every == 0) out.history.push_back(rec);
    }
    out.modes = project_noise(out.state.Z - a0, params);
    return out;
}

}  // namespace calolab
