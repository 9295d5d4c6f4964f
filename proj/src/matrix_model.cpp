#include "calolab/matrix_model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace calolab {

namespace {

void require_normalized(const PhysParams& p)
{
    p.validate();
    if (!p.normalized(1e-12)) throw ValidationError("matrix model expects normalized units (m*Omega = 1)");
}

Mat comm(const Mat& A, const Mat& B) { return A * B - B * A; }

// N^2 reals of a (nominally) Hermitian matrix: diagonal real parts, then the
// real and imaginary parts of the strict upper triangle.
Eigen::VectorXd encode_hermitian(const Mat& H)
{
    const int N = static_cast<int>(H.rows());
    Eigen::VectorXd out(N * N);
    int k = 0;
    for (int i = 0; i < N; ++i) out(k++) = H(i, i).real();
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            const cplx z = 0.5 * (H(i, j) + std::conj(H(j, i)));
            out(k++) = z.real();
            out(k++) = z.imag();
        }
    return out;
}

Mat hermitian_basis(int N, int i, int j, bool imag_part)
{
    Mat B = Mat::Zero(N, N);
    if (i == j) {
        B(i, i) = 1.0;
    } else if (!imag_part) {
        B(i, j) = 1.0;
        B(j, i) = 1.0;
    } else {
        B(i, j) = cplx(0.0, 1.0);
        B(j, i) = cplx(0.0, -1.0);
    }
    return B;
}

Eigen::VectorXd encode_rates(const ComplexMatrixState& s, const Mat& a, const Mat& velocity)
{
    const int N = s.N();
    const Mat cr = comm(velocity, s.Z.adjoint()) + comm(s.Z, velocity.adjoint());
    const Mat gr = comm(a, velocity.adjoint()) + comm(a.adjoint(), velocity);
    Eigen::VectorXd out(2 * N * N);
    out << encode_hermitian(cr), encode_hermitian(cplx(0.0, 1.0) * gr);
    return out;
}

}  // namespace

bool ComplexMatrixState::coulomb() const
{
    const int n = N();
    if (v.size() != n || n == 0) return false;
    for (int i = 0; i < n - 1; ++i)
        if (std::abs(v(i)) > 1e-15) return false;
    return std::abs(v(n - 1) - 1.0) < 1e-15;
}

Vec coulomb_vector(int N)
{
    Vec v = Vec::Zero(N);
    if (N > 0) v(N - 1) = 1.0;
    return v;
}

Vec uniform_vector(int N) { return Vec::Constant(N, 1.0 / std::sqrt(double(N))); }

Mat annihilation_matrix(int N, double ell_theta)
{
    if (N < 1) throw ValidationError("matrix dimension must be >= 1");
    Mat a = Mat::Zero(N, N);
    for (int j = 1; j < N; ++j) a(j - 1, j) = ell_theta * std::sqrt(2.0 * j);
    return a;
}

ComplexMatrixState build_annihilation(int N, const PhysParams& params)
{
    require_normalized(params);
    ComplexMatrixState s;
    s.Z = annihilation_matrix(N, params.ell_theta());
    s.v = coulomb_vector(N);
    s.params = params;
    s.on_shell = true;
    return s;
}

Mat constraint_target(int N, double ell_theta2, const Vec& v)
{
    return 2.0 * ell_theta2 * (Mat::Identity(N, N) - double(N) * v * v.adjoint());
}

Mat constraint_residual(const ComplexMatrixState& s)
{
    return comm(s.Z, s.Z.adjoint()) - constraint_target(s.N(), s.params.ell_theta2(), s.v);
}

Mat gauge_residual(const ComplexMatrixState& s)
{
    const Mat a = annihilation_matrix(s.N(), s.params.ell_theta());
    return comm(a, s.Z.adjoint()) + comm(a.adjoint(), s.Z);
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ComplexMatrixState evolve_exact(const ComplexMatrixState& s, double t)
{
    ComplexMatrixState out = s;
    out.Z = std::polar(1.0, -s.params.omega * t) * s.Z;
    return out;
}

ComplexMatrixState evolve_gauge_fixed(const ComplexMatrixState& s, double t)
{
    if (!s.coulomb()) throw ValidationError("gauge-fixed evolution is defined for the Coulomb gauge");
    ComplexMatrixState out = evolve_exact(s, t);
    const int N = s.N();
    const double phi = s.params.omega * t;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out.Z(i, j) *= std::polar(1.0, -phi * (i - j));
    return out;
}

DiagonalGauge embed_diagonal_gauge(const std::vector<double>& x, const std::vector<double>& p, const PhysParams& params,
                                   double tol)
{
    params.validate();
    const int N = static_cast<int>(x.size());
    if (N < 1 || p.size() != x.size()) throw ValidationError("positions and momenta must have equal, nonzero length");
    double com = 0.0, scale = 0.0;
    for (double xi : x) {
        com += xi;
        scale = std::max(scale, std::abs(xi));
    }
    if (std::abs(com) > tol * std::max(1.0, scale)) throw ValidationError("center of mass must be at the origin");

    const double s = std::sqrt(params.m * params.omega);
    const double th = params.theta;
    DiagonalGauge out;
    out.X = Mat::Zero(N, N);
    out.Y = Mat::Zero(N, N);
    out.lambda = Mat::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        out.X(i, i) = s * x[i];
        out.Y(i, i) = p[i] / s;
        double diag = 0.0;
        for (int j = 0; j < N; ++j) {
            if (i == j) continue;
            const double d = x[i] - x[j];
            if (d == 0.0 || std::abs(d) < 1e-300)
                throw NumericalError(NumericalError::Kind::collision, "coincident particle positions");
            out.Y(i, j) = cplx(0.0, -th / (s * d));
            out.lambda(i, j) = -(th / params.m) / (d * d);
            diag += 1.0 / (d * d);
        }
        out.lambda(i, i) = (th / params.m) * diag;
    }
    out.state.Z = out.X + cplx(0.0, 1.0) * out.Y;
    out.state.v = uniform_vector(N);
    out.state.params = params;
    out.state.on_shell = true;
    return out;
}

double mode_coefficient(int n, int N, double ell_theta)
{
    if (n < 0 || n > N - 1) throw ValidationError("mode index out of range for dimension N");
    const double log_c2 = std::lgamma(double(N - n)) - std::lgamma(double(N + 1)) -
                          n * std::log(2.0 * ell_theta * ell_theta);
    return std::exp(0.5 * log_c2);
}

Mat word_product(const std::vector<Mat>& alphabet, const std::vector<int>& word)
{
    if (alphabet.empty()) throw ValidationError("empty alphabet");
    const int N = static_cast<int>(alphabet[0].rows());
    Mat out = Mat::Identity(N, N);
    for (int letter : word) {
        if (letter < 0 || letter >= static_cast<int>(alphabet.size())) throw ValidationError("word letter out of range");
        if (alphabet[letter].rows() != N || alphabet[letter].cols() != N) throw ValidationError("dimension mismatch");
        out = out * alphabet[letter];
    }
    return out;
}

Mat symmetrized_product(const std::vector<Mat>& alphabet, std::vector<int> word)
{
    if (word.size() > 12) throw ValidationError("symmetrized word longer than 12 letters");
    std::sort(word.begin(), word.end());
    const int N = static_cast<int>(alphabet.at(0).rows());
    Mat sum = Mat::Zero(N, N);
    long count = 0;
    do {
        sum += word_product(alphabet, word);
        ++count;
    } while (std::next_permutation(word.begin(), word.end()));
    return sum / double(count);
}

Mat matrix_power(const Mat& m, int n)
{
    Mat out = Mat::Identity(m.rows(), m.cols());
    for (int k = 0; k < n; ++k) out = out * m;
    return out;
}

double classical_invariant(const ComplexMatrixState& s, int n, double prefactor)
{
    if (n < 1 || n > 4) throw ValidationError("invariant order must be in [1, 4]");
    std::vector<int> word(2 * n, 1);
    std::fill(word.begin(), word.begin() + n, 0);
    const Mat S = symmetrized_product({s.Z.adjoint(), s.Z}, word);
    if (prefactor <= 0.0) prefactor = s.N();
    return prefactor * (s.v.adjoint() * S * s.v)(0, 0).real();
}

cplx spectrum_generator(const ComplexMatrixState& s, int n)
{
    return double(s.N()) * (s.v.adjoint() * matrix_power(s.Z, n) * s.v)(0, 0);
}

Mat constraint_rate(const ComplexMatrixState& s, const Mat& velocity)
{
    return comm(velocity, s.Z.adjoint()) + comm(s.Z, velocity.adjoint());
}

Mat gauge_rate(const ComplexMatrixState& s, const Mat& velocity)
{
    const Mat a = annihilation_matrix(s.N(), s.params.ell_theta());
    return comm(a, velocity.adjoint()) + comm(a.adjoint(), velocity);
}

SurfaceProjection project_to_surface(const ComplexMatrixState& s0, double tol, int max_iter)
{
    require_normalized(s0.params);
    if (!s0.coulomb()) throw ValidationError("surface projection is implemented for the Coulomb gauge");
    const int N = s0.N();
    const Mat a = annihilation_matrix(N, s0.params.ell_theta());
    SurfaceProjection out;
    out.state = s0;
    auto residual_of = [&](const ComplexMatrixState& s) {
        return std::max(max_abs(constraint_residual(s)), max_abs(gauge_residual(s)));
    };
    out.residual = residual_of(out.state);
    Eigen::MatrixXd J(2 * N * N, 2 * N * N);
    while (out.residual > tol) {
        if (out.iterations >= max_iter)
            throw NumericalError(NumericalError::Kind::non_convergence, "projection onto the constraint surface did not converge");
        const ComplexMatrixState& s = out.state;
        int col = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int part = 0; part < 2; ++part) {
                    Mat dZ = Mat::Zero(N, N);
                    dZ(i, j) = part ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
                    J.col(col++) = encode_rates(s, a, dZ);
                }
        Eigen::VectorXd rhs(2 * N * N);
        rhs << encode_hermitian(constraint_residual(s)), encode_hermitian(cplx(0.0, 1.0) * gauge_residual(s));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        const Eigen::VectorXd step = -svd.solve(rhs);
        Mat dZ(N, N);
        for (int i = 0, k = 0; i < N; ++i)
            for (int j = 0; j < N; ++j, k += 2) dZ(i, j) = cplx(step(k), step(k + 1));
        out.state.Z += dZ;
        ++out.iterations;
        const double r = residual_of(out.state);
        if (!std::isfinite(r) || (out.iterations > 3 && r > 0.5 * out.residual && r > tol))
            throw NumericalError(NumericalError::Kind::non_convergence, "projection onto the constraint surface stalled");
        out.residual = r;
    }
    out.distance = (out.state.Z - s0.Z).norm();
    out.state.on_shell = true;
    return out;
}

MultiplierSolution solve_multipliers(const ComplexMatrixState& s_in, const Mat& raw, const MultiplierOptions& opt)
{
    require_normalized(s_in.params);
    if (!s_in.coulomb()) throw ValidationError("multiplier solver is implemented for the Coulomb gauge");
    const int N = s_in.N();
    if (raw.rows() != N || raw.cols() != N) throw ValidationError("velocity dimension mismatch");

    MultiplierSolution sol;
    sol.state = s_in;
    const double off_shell = std::max(max_abs(constraint_residual(s_in)), max_abs(gauge_residual(s_in)));
    if (off_shell > opt.tol) {
        if (!opt.project_off_shell) throw ValidationError("state is not on the constraint surface");
        const SurfaceProjection pr = project_to_surface(s_in, std::min(opt.tol, 1e-12));
        sol.state = pr.state;
        sol.projected = true;
        sol.projection_distance = pr.distance;
    }
    const ComplexMatrixState& s = sol.state;
    const Mat a = annihilation_matrix(N, s.params.ell_theta());

    // lambda must commute with |v><v|: no entries coupling the last index to the rest.
    std::vector<Mat> basis;
    std::vector<int> kind;  // 0 -> lambda, 1 -> nu
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            for (int part = 0; part < (i == j ? 1 : 2); ++part) {
                if (i != j && j == N - 1) continue;
                basis.push_back(hermitian_basis(N, i, j, part == 1));
                kind.push_back(0);
            }
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            for (int part = 0; part < (i == j ? 1 : 2); ++part) {
                basis.push_back(hermitian_basis(N, i, j, part == 1));
                kind.push_back(1);
            }

    const int cols = static_cast<int>(basis.size());
    Eigen::MatrixXd A(2 * N * N, cols);
    for (int c = 0; c < cols; ++c) {
        const Mat dv = kind[c] == 0 ? Mat(cplx(0.0, 1.0) * comm(s.Z, basis[c])) : Mat(comm(a, basis[c]));
        A.col(c) = encode_rates(s, a, dv);
    }
    const Eigen::VectorXd b = -encode_rates(s, a, raw);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(opt.rank_tol);
    sol.rank = static_cast<int>(svd.rank());
    const auto& sv = svd.singularValues();
    sol.conditioning = (sol.rank > 0 && sv(0) > 0.0) ? sv(sol.rank - 1) / sv(0) : 0.0;
    const int expected = N > 1 ? 2 * N * N - 2 * N : 0;
    if (sol.rank < expected)
        throw NumericalError(NumericalError::Kind::singular,
                             "constraint/gauge pairing is singular at this state (rank " + std::to_string(sol.rank) +
                                 " < " + std::to_string(expected) + ")");

    const Eigen::VectorXd x = N > 1 ? Eigen::VectorXd(svd.solve(b)) : Eigen::VectorXd::Zero(cols);
    sol.lambda = Mat::Zero(N, N);
    sol.nu = Mat::Zero(N, N);
    for (int c = 0; c < cols; ++c) (kind[c] == 0 ? sol.lambda : sol.nu) += x(c) * basis[c];
    sol.velocity = raw + cplx(0.0, 1.0) * comm(s.Z, sol.lambda) + comm(a, sol.nu);

    const Mat cr = constraint_rate(s, sol.velocity);
    const Mat gr = gauge_rate(s, sol.velocity);
    sol.residual = std::max(max_abs(cr), max_abs(gr));
    sol.boundary_slack.resize(N);
    for (int i = 0; i < N; ++i) sol.boundary_slack[i] = gr(i, N - 1).imag();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (sol.residual > opt.tol * scale)
        throw NumericalError(NumericalError::Kind::singular,
                             "multiplier system is inconsistent at this state (residual " + std::to_string(sol.residual) + ")");
    return sol;
}

ConstraintAlgebraReport constraint_algebra(const ComplexMatrixState& s)
{
    require_normalized(s.params);
    const int N = s.N();
    const int D = N * N;
    const Mat X = s.X(), Y = s.Y();
    const Mat a = annihilation_matrix(N, s.params.ell_theta());
    const Mat xh = (a + a.adjoint()) / 2.0;
    const Mat yh = (a - a.adjoint()) / cplx(0.0, 2.0);

    struct Grad {
        Mat gx, gy;
    };
    auto grad_phi = [&](int i, int j) {
        Grad g{Mat::Zero(N, N), Mat::Zero(N, N)};
        for (int b = 0; b < N; ++b) {
            g.gx(i, b) += Y(b, j);
            g.gy(i, b) -= X(b, j);
        }
        for (int a2 = 0; a2 < N; ++a2) {
            g.gx(a2, j) -= Y(i, a2);
            g.gy(a2, j) += X(i, a2);
        }
        return g;
    };
    auto grad_chi = [&](int i, int j) {
        Grad g{Mat::Zero(N, N), Mat::Zero(N, N)};
        for (int a2 = 0; a2 < N; ++a2) {
            g.gx(a2, j) += xh(i, a2);
            g.gy(a2, j) += yh(i, a2);
        }
        for (int b = 0; b < N; ++b) {
            g.gx(i, b) -= xh(b, j);
            g.gy(i, b) -= yh(b, j);
        }
        return g;
    };
    auto bracket = [&](const Grad& f, const Grad& g) {
        return (f.gx.cwiseProduct(g.gy.transpose())).sum() - (f.gy.transpose().cwiseProduct(g.gx)).sum();
    };

    std::vector<Grad> phi, chi;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            phi.push_back(grad_phi(i, j));
            chi.push_back(grad_chi(i, j));
        }

    ConstraintAlgebraReport r;
    r.N = N;
    r.phi_phi.resize(D, D);
    r.chi_chi.resize(D, D);
    r.phi_chi.resize(D, D);
    r.chi_phi.resize(D, D);
    for (int p = 0; p < D; ++p)
        for (int q = 0; q < D; ++q) {
            r.phi_phi(p, q) = bracket(phi[p], phi[q]);
            r.chi_chi(p, q) = bracket(chi[p], chi[q]);
            r.phi_chi(p, q) = bracket(phi[p], chi[q]);
            r.chi_phi(p, q) = bracket(chi[p], phi[q]);
        }
    r.antisymmetry = std::max({max_abs(r.phi_phi + r.phi_phi.transpose()), max_abs(r.chi_chi + r.chi_chi.transpose()),
                               max_abs(r.phi_chi + r.chi_phi.transpose())});

    const Mat mu = comm(X, Y);
    const Mat c = cplx(0.0, s.params.ell_theta2()) * (Mat::Identity(N, N) - double(N) * s.v * s.v.adjoint());
    const Mat phi_val = mu - c;
    auto delta = [](int u, int w) { return u == w ? 1.0 : 0.0; };
    Mat S(D, D), Sc(D, D), Sphi(D, D);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    const int p = i * N + j, q = k * N + l;
                    S(p, q) = delta(i, l) * mu(k, j) - delta(k, j) * mu(i, l);
                    Sc(p, q) = delta(i, l) * c(k, j) - delta(k, j) * c(i, l);
                    Sphi(p, q) = delta(i, l) * phi_val(k, j) - delta(k, j) * phi_val(i, l);
                }
    const double denom = S.squaredNorm();
    r.structure_constant = denom > 0.0 ? ((S.adjoint() * r.phi_phi).trace() / denom).real() : 0.0;
    const Mat remainder = r.phi_phi - r.structure_constant * Sphi;
    r.boundary_mismatch = max_abs(remainder - r.structure_constant * Sc);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    if (i == N - 1 || j == N - 1 || k == N - 1 || l == N - 1) continue;
                    const int p = i * N + j, q = k * N + l;
                    r.interior_remainder = std::max(r.interior_remainder, std::abs(remainder(p, q)));
                    r.chi_chi_interior = std::max(r.chi_chi_interior, std::abs(r.chi_chi(p, q)));
                }
    Eigen::JacobiSVD<Mat> svd(r.phi_chi);
    svd.setThreshold(1e-10);
    r.pairing_rank = static_cast<int>(svd.rank());
    return r;
}

}  // namespace calolab
