#pragma once

#include <vector>

#include "calolab/core.hpp"
#include "calolab/matrix_model.hpp"

namespace calolab {

// Periodic physical-time lattice.
struct EuclideanLattice {
    int M = 1;
    double dt = 0.1;
    bool periodic = true;

    void validate() const;
};

// Drift eigenvalue on lattice Fourier mode j (omega_j = 2 pi j / (M dt)):
// a_j = -(i sin(omega_j dt) / dt + n Omega).
std::vector<cplx> drift_eigenvalues(const EuclideanLattice& lat, int n, double omega);

// D[alpha](t_k) = -(alpha_{k+1} - alpha_{k-1}) / (2 dt) - n Omega alpha_k.
std::vector<cplx> mode_drift(const std::vector<cplx>& field, const EuclideanLattice& lat, int n, double omega);
// Drift of the holomorphic partner: the transpose, +derivative - n Omega.
std::vector<cplx> partner_drift(const std::vector<cplx>& field, const EuclideanLattice& lat, int n, double omega);

struct ModeConfig {
    EuclideanLattice lattice;
    int n_max = 4;
    double dtau = 0.01;
    double burn_in = 10.0;  // in units of 1/Omega
    double stride = 1.0;    // in units of 1/Omega
    int samples = 20;       // per trajectory after burn-in
    int trajectories = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    double blowup = 1e8;    // |alpha|^2 / (l_h^2 n / Omega) beyond this is an instability

    void validate(const PhysParams& params) const;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

struct ModeStatistics {
    int n = 0;
    Estimate conj_cov;                 // <alpha alpha*> per site
    Estimate holo_cov;                 // <alpha alpha_partner> per site, real part
    std::vector<Estimate> holo_lag;    // <alpha(t0 + k) alpha_partner(t0)>, averaged over t0
    double holo_lag_imag_max = 0.0;    // max |imag| of the lag correlator means
    double decay_rate = NAN;           // fitted from holo_lag
    int fit_lags = 0;
};

struct ModeEnsemble {
    ModeConfig config;
    std::vector<ModeStatistics> modes;  // index n - 1
    Estimate cross_23;                  // Re <alpha_2 alpha_3*>
    Estimate cross_23_imag;
    Estimate drift_check;               // mean conj_cov(first half) - conj_cov(second half) for n = 1
    long steps = 0;
};

ModeEnsemble mode_simulate(const ModeConfig& cfg, const PhysParams& params);

// Exact stationary statistics of the lattice system.  "continuous" solves
// A C + C A^dag + 2 D = 0 mode by mode; "em" is the exact stationary state of
// the Euler-Maruyama recursion with step dtau.
struct LyapunovOracle {
    int n = 0;
    EuclideanLattice lattice;
    double diffusion = 0.0;  // D = l_h^2 n per site
    std::vector<cplx> eigen;
    std::vector<double> conj_continuous, conj_em;
    std::vector<cplx> holo_continuous, holo_em;

    double conj_site(bool em) const;
    cplx holo_lag(int k, bool em) const;
    // Log-linear fit of the lag correlator over k = 1..kmax.
    double decay_rate(int kmax, bool em) const;
    // Site-space conjugate covariance C_{kl}.
    Eigen::MatrixXcd conj_matrix(bool em) const;
};

LyapunovOracle lyapunov_oracle(const EuclideanLattice& lat, int n, const PhysParams& params, double dtau);

// Lags used by the decay fit: 1..floor(1.5 / (n Omega dt)), capped at M/2.
int decay_fit_lags(const EuclideanLattice& lat, int n, double omega);
double fit_decay(const std::vector<double>& lag_values, double dt, int kmax);

// d xi_{n+1} = (n+1) c_n tr(a^n Xi) for n = 0..N-1.
std::vector<cplx> project_noise(const Mat& xi, const PhysParams& params);

// Xi_ij complex Gaussian with <|Xi_ij|^2> = 2 l_h^2 dtau.
Mat matrix_noise(int N, const PhysParams& params, double dtau, NoiseStream& rng);

struct MatrixConfig {
    int steps = 10000;
    double dtau = 1e-3;
    double residual_tol = 1e-10;  // corrective projection threshold
    int max_retries = 8;
    std::uint64_t seed = 1;
    bool decomposition = false;   // record classical/quantum velocity split
    int record_every = 1;
};

struct MatrixStepRecord {
    int step = 0;
    double constraint = 0.0;
    double gauge = 0.0;
    double multiplier_norm = 0.0;
    double dtau = 0.0;
    bool corrected = false;
    double classical_norm = NAN;
    double quantum_norm = NAN;
};

struct MatrixFieldState {
    ComplexMatrixState state;
    std::vector<MatrixStepRecord> history;
    double max_constraint = 0.0;
    double max_gauge = 0.0;
    int rejected = 0;
    int corrections = 0;
    std::vector<cplx> modes;  // alpha_{n+1} = (n+1) c_n tr(a^n (Z - a))
};

// Explicit projected Euler-Maruyama for dZ = i Omega Z dtau + Xi.
MatrixFieldState matrix_simulate(int N, const PhysParams& params, const MatrixConfig& cfg);

// Raw drift of the matrix process.
Mat matrix_drift(const ComplexMatrixState& s);

}  // namespace calolab
