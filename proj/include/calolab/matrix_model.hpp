#pragma once

#include <vector>

#include <Eigen/Dense>

#include "calolab/core.hpp"

namespace calolab {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Z = X + iY with the vector |v> that enters the constraint
// [Z, Z^dag] = 2 l^2 (1 - N |v><v|).  Coulomb gauge uses the last basis
// vector, the diagonal (particle) gauge uses the uniform vector.
struct ComplexMatrixState {
    Mat Z;
    Vec v;
    PhysParams params;
    bool on_shell = false;

    int N() const { return static_cast<int>(Z.rows()); }
    Mat X() const { return (Z + Z.adjoint()) / 2.0; }
    Mat Y() const { return (Z - Z.adjoint()) / cplx(0.0, 2.0); }
    bool coulomb() const;
};

Vec coulomb_vector(int N);
Vec uniform_vector(int N);

// a = l * sum_{j=1}^{N-1} sqrt(2j) |j-1><j|
Mat annihilation_matrix(int N, double ell_theta);
ComplexMatrixState build_annihilation(int N, const PhysParams& params);

Mat constraint_target(int N, double ell_theta2, const Vec& v);
Mat constraint_residual(const ComplexMatrixState& s);
Mat gauge_residual(const ComplexMatrixState& s);
double max_abs(const Mat& m);

ComplexMatrixState evolve_exact(const ComplexMatrixState& s, double t);
// evolve_exact followed by the gauge rotation exp(-i Omega t n) with
// n = diag(0..N-1), which commutes with |v><v| for the Coulomb vector and
// keeps [a, Z^dag] + [a^dag, Z] unchanged.  a itself is a fixed point.
ComplexMatrixState evolve_gauge_fixed(const ComplexMatrixState& s, double t);

struct DiagonalGauge {
    Mat X, Y, lambda;
    ComplexMatrixState state;
};

// x must be distinct with sum ~ 0.  Off-diagonal Y carries -i theta / (x_i - x_j)
// so that [X, Y] = i theta (1 - N |u><u|) for the uniform |u>.
DiagonalGauge embed_diagonal_gauge(const std::vector<double>& x, const std::vector<double>& p,
                                   const PhysParams& params, double tol = 1e-9);

// c_n with tr(a^dag^n a^n) = 1 / ((n+1) c_n^2) in dimension N; n in [0, N-1].
double mode_coefficient(int n, int N, double ell_theta);

// Average of prod(alphabet[word[k]]) over all distinct orderings of `word`.
Mat symmetrized_product(const std::vector<Mat>& alphabet, std::vector<int> word);
Mat word_product(const std::vector<Mat>& alphabet, const std::vector<int>& word);
Mat matrix_power(const Mat& m, int n);

// I_n = prefactor <v| S(Z^dag^n Z^n) |v>; prefactor <= 0 selects N.
double classical_invariant(const ComplexMatrixState& s, int n, double prefactor = 0.0);
// B_n = N <v| Z^n |v>
cplx spectrum_generator(const ComplexMatrixState& s, int n);

struct MultiplierSolution {
    Mat lambda;
    Mat nu;
    Mat velocity;  // raw + i[Z, lambda] + [a, nu]
    std::vector<double> boundary_slack;
    double residual = 0.0;
    double conditioning = 0.0;  // smallest retained / largest singular value
    int rank = 0;
    bool projected = false;     // state was first moved onto the constraint surface
    double projection_distance = 0.0;
    ComplexMatrixState state;   // the state the solution refers to
};

struct MultiplierOptions {
    double tol = 1e-10;
    double rank_tol = 1e-9;
    bool project_off_shell = true;
};

// Requires the Coulomb-gauge vector.  Throws NumericalError(singular) if the
// pairing between constraint and gauge directions loses rank.
MultiplierSolution solve_multipliers(const ComplexMatrixState& s, const Mat& raw_velocity,
                                     const MultiplierOptions& opt = {});

struct SurfaceProjection {
    ComplexMatrixState state;
    int iterations = 0;
    double residual = 0.0;
    double distance = 0.0;
};

// Gauss-Newton with minimum-norm steps onto {constraint = 0, gauge = 0}.
SurfaceProjection project_to_surface(const ComplexMatrixState& s, double tol = 1e-12, int max_iter = 50);

// Rates of change of the constraint and gauge residuals along a velocity.
Mat constraint_rate(const ComplexMatrixState& s, const Mat& velocity);
Mat gauge_rate(const ComplexMatrixState& s, const Mat& velocity);

// Poisson-bracket tables of phi = [X,Y] - i l^2 (1 - N|v><v|) and
// chi = [x, X] + [y, Y] with x, y the Hermitian parts of a, under
// {X_ab, Y_cd} = delta_ad delta_bc.  Index (i,j) maps to i*N + j.
struct ConstraintAlgebraReport {
    int N = 0;
    Mat phi_phi, chi_chi, phi_chi, chi_phi;
    double structure_constant = 0.0;   // s in {phi_ij, phi_kl} = s(d_il phi_kj - d_kj phi_il) + boundary
    double interior_remainder = 0.0;   // max remainder on entries not touching index N-1
    double boundary_mismatch = 0.0;    // remainder minus its closed form
    double chi_chi_interior = 0.0;     // max |{chi,chi}| away from index N-1
    double antisymmetry = 0.0;
    int pairing_rank = 0;              // rank of {phi, chi}
};

ConstraintAlgebraReport constraint_algebra(const ComplexMatrixState& s);

}  // namespace calolab
