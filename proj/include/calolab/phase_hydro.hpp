#pragma once

#include <string>
#include <vector>

#include "calolab/core.hpp"
#include "calolab/matrix_model.hpp"

namespace calolab {

// Cell-centred uniform grid over [-half_x, half_x] x [-half_p, half_p].
struct GridSpec {
    int nx = 256;
    int np = 256;
    double half_x = 10.0;
    double half_p = 10.0;

    double dx() const { return 2.0 * half_x / nx; }
    double dp() const { return 2.0 * half_p / np; }
    double x(int i) const { return -half_x + (i + 0.5) * dx(); }
    double p(int j) const { return -half_p + (j + 0.5) * dp(); }
    double area() const { return 4.0 * half_x * half_p; }
};

// Square grid reaching `radius_factor` droplet radii sqrt(2N) l.
GridSpec droplet_grid(int N, const PhysParams& params, int points, double radius_factor = 2.2);

struct GridField {
    GridSpec grid;
    std::vector<cplx> values;  // index i * np + j, i along x

    GridField() = default;
    explicit GridField(const GridSpec& g) : grid(g), values(std::size_t(g.nx) * g.np) {}

    cplx& at(int i, int j) { return values[std::size_t(i) * grid.np + j]; }
    const cplx& at(int i, int j) const { return values[std::size_t(i) * grid.np + j]; }
    cplx integral() const;
    // Bilinear interpolation of the sampled values; zero outside the sampled hull.
    cplx interpolate(double x, double p) const;

    GridField& operator+=(const GridField& o);
    GridField operator+(const GridField& o) const;
    GridField operator*(cplx s) const;

    std::string to_csv(bool real_only = true) const;
    std::string to_matrix_text() const;  // rows along p, columns along x, real part
};

struct VectorField {
    GridField vx, vy;
    bool budget_exceeded = false;
};

// Normalized oscillator eigenfunction with exp(-x^2 / (2 l^2)).
double hermite_state(int i, double x, double ell);
// psi_0..psi_{n-1} at x.
std::vector<double> hermite_states(int n, double x, double ell);

// Weyl symbol of M with kernel exp(-i p y / theta), so that the annihilation
// matrix maps to x + i p.  Normalized so that integral / (2 pi l^2) = tr M.
GridField wigner_transform(const Mat& M, const PhysParams& params, const GridSpec& grid, int workers = 1);

// Closed form for the diagonal elements: 2 (-1)^n exp(-r^2) L_n(2 r^2).
double wigner_diagonal_closed_form(int n, double x, double p, const PhysParams& params);

struct DropletReport {
    GridField density;
    double plateau = 0.0;
    double edge_radius = 0.0;
    double expected_radius = 0.0;
    double trace = 0.0;           // integral / (2 pi l^2)
    double tail_ratio = 0.0;      // P(2R) / plateau along the x axis
};

DropletReport droplet_density(int N, const PhysParams& params, const GridSpec& grid, int workers = 1);

// V(w) = sum_n c_n alpha_{n+1} w^n, n = 0..n_max (coeffs[n] holds alpha_{n+1}).
struct DeformationSeries {
    int N = 2;
    std::vector<cplx> coeffs;
    double epsilon = 1e-3;

    cplx operator()(cplx w, const PhysParams& params) const;
    double budget(const PhysParams& params) const;  // max_n |c_n alpha_{n+1}| R^n
    bool within_budget(const PhysParams& params) const { return budget(params) <= epsilon * (1.0 + 1e-12); }
};

// Single mode normalized so that its size on the droplet edge is `amplitude`.
DeformationSeries single_mode(int n, double amplitude, int N, const PhysParams& params, double epsilon);

// Displacement dR = (Re V, Im V) with V evaluated at w = x + i p.
VectorField displacement_field(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid);

// v = Omega dR x z_hat, i.e. the displacement rotated by -90 degrees; this is
// the velocity of dR under V' = -i Omega V.
VectorField velocity_field(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid);

// delta rho = -rho0 div dR with rho0 = 1 / l^2, central differences.
GridField density_perturbation(const VectorField& displacement, const PhysParams& params);

GridField vorticity_from_density(const GridField& delta_rho, const PhysParams& params, double tol = 1e-6);

struct CirculationReport {
    double circulation = 0.0;       // loop integral of v
    double enclosed_vorticity = 0.0;  // (theta/m) * integral of delta rho inside the loop
    double relative_error = 0.0;
    bool budget_ok = true;
};

// Circle of given centre and radius, which should lie inside the plateau.
CirculationReport circulation_check(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid,
                                    double cx, double cp, double radius, int loop_points = 2048);

// rho = P / {X, Y} with X, Y the Weyl symbols of the Hermitian parts of Z and
// the bracket evaluated by central differences.
GridField density_from_jacobian(const ComplexMatrixState& s, const GridSpec& grid, int workers = 1);

}  // namespace calolab
