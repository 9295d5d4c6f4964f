#include "calolab/phase_hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "calolab/report.hpp"

namespace calolab {

namespace {
constexpr double pi = std::numbers::pi;

void require_normalized(const PhysParams& p)
{
    p.validate();
    if (!p.normalized(1e-12)) throw ValidationError("phase-space fields expect normalized units (m*Omega = 1)");
}
}  // namespace

GridSpec droplet_grid(int N, const PhysParams& params, int points, double radius_factor)
{
    const double R = std::sqrt(2.0 * N) * params.ell_theta();
    GridSpec g;
    g.nx = g.np = points;
    g.half_x = g.half_p = radius_factor * R;
    return g;
}

cplx GridField::integral() const
{
    return pairwise_sum(values.data(), values.size()) * (grid.dx() * grid.dp());
}

cplx GridField::interpolate(double x, double p) const
{
    const double fx = (x + grid.half_x) / grid.dx() - 0.5;
    const double fp = (p + grid.half_p) / grid.dp() - 0.5;
    const int i = static_cast<int>(std::floor(fx));
    const int j = static_cast<int>(std::floor(fp));
    if (i < 0 || j < 0 || i + 1 >= grid.nx || j + 1 >= grid.np) return 0.0;
    const double tx = fx - i, tp = fp - j;
    return (1 - tx) * (1 - tp) * at(i, j) + tx * (1 - tp) * at(i + 1, j) + (1 - tx) * tp * at(i, j + 1) +
           tx * tp * at(i + 1, j + 1);
}

GridField& GridField::operator+=(const GridField& o)
{
    if (o.values.size() != values.size()) throw ValidationError("grid mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
}

GridField GridField::operator+(const GridField& o) const
{
    GridField r = *this;
    r += o;
    return r;
}

GridField GridField::operator*(cplx s) const
{
    GridField r = *this;
    for (auto& v : r.values) v *= s;
    return r;
}

std::string GridField::to_csv(bool real_only) const
{
    std::ostringstream out;
    out << (real_only ? "x,p,value\n" : "x,p,re,im\n");
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j) {
            out << fmt_num(grid.x(i)) << ',' << fmt_num(grid.p(j)) << ',' << fmt_num(at(i, j).real());
            if (!real_only) out << ',' << fmt_num(at(i, j).imag());
            out << '\n';
        }
    return out.str();
}

std::string GridField::to_matrix_text() const
{
    std::ostringstream out;
    for (int j = grid.np - 1; j >= 0; --j) {
        for (int i = 0; i < grid.nx; ++i) out << (i ? " " : "") << fmt_num(at(i, j).real());
        out << '\n';
    }
    return out.str();
}

double hermite_state(int i, double x, double ell)
{
    if (i < 0) throw ValidationError("state index must be >= 0");
    return hermite_states(i + 1, x, ell)[i];
}

std::vector<double> hermite_states(int n, double x, double ell)
{
    std::vector<double> psi(std::max(n, 0));
    if (n <= 0) return psi;
    const double xi = x / ell;
    psi[0] = std::exp(-0.5 * xi * xi) / std::sqrt(std::sqrt(pi) * ell);
    if (n > 1) psi[1] = std::sqrt(2.0) * xi * psi[0];
    for (int k = 1; k + 1 < n; ++k)
        psi[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * psi[k] - std::sqrt(double(k) / (k + 1)) * psi[k - 1];
    return psi;
}

GridField wigner_transform(const Mat& M, const PhysParams& params, const GridSpec& grid, int workers)
{
    require_normalized(params);
    const int N = static_cast<int>(M.rows());
    if (N < 1 || M.cols() != N) throw ValidationError("wigner_transform needs a square matrix");
    const double ell = params.ell_theta();
    const double theta = params.theta;
    const double Rpsi = ell * (std::sqrt(2.0 * N + 1.0) + 8.0);
    if (grid.half_x < std::sqrt(2.0 * N) * ell || grid.half_p * ell * ell / theta < std::sqrt(2.0 * N) * ell)
        throw NumericalError(NumericalError::Kind::truncation, "grid does not cover the droplet radius");

    const double kmax = std::sqrt(2.0 * N + 1.0) / ell + grid.half_p / theta;
    const double dy = 2.0 * pi / (1.5 * kmax + 6.0 / ell);
    const int half = static_cast<int>(std::ceil(2.0 * Rpsi / dy));
    const int Ny = 2 * half + 1;
    Eigen::VectorXd y(Ny);
    for (int k = 0; k < Ny; ++k) y(k) = (k - half) * dy;

    Eigen::MatrixXcd E(grid.np, Ny);
    for (int j = 0; j < grid.np; ++j)
        for (int k = 0; k < Ny; ++k) E(j, k) = std::polar(dy, -grid.p(j) * y(k) / theta);

    bool diagonal = true;
    for (int i = 0; i < N && diagonal; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j && M(i, j) != cplx(0.0)) {
                diagonal = false;
                break;
            }

    GridField out(grid);
    parallel_for(grid.nx, workers, [&](int ix) {
        const double x = grid.x(ix);
        Eigen::MatrixXd U(N, Ny), W(N, Ny);
        for (int k = 0; k < Ny; ++k) {
            const auto u = hermite_states(N, x + 0.5 * y(k), ell);
            const auto w = hermite_states(N, x - 0.5 * y(k), ell);
            for (int i = 0; i < N; ++i) {
                U(i, k) = u[i];
                W(i, k) = w[i];
            }
        }
        Eigen::VectorXcd K(Ny);
        if (diagonal) {
            for (int k = 0; k < Ny; ++k) {
                cplx s = 0.0;
                for (int i = 0; i < N; ++i) s += M(i, i) * U(i, k) * W(i, k);
                K(k) = s;
            }
        } else {
            const Eigen::MatrixXcd MW = M * W.cast<cplx>();
            for (int k = 0; k < Ny; ++k) K(k) = (U.col(k).cast<cplx>().array() * MW.col(k).array()).sum();
        }
        const Eigen::VectorXcd row = E * K;
        for (int j = 0; j < grid.np; ++j) out.at(ix, j) = row(j);
    });
    return out;
}

double wigner_diagonal_closed_form(int n, double x, double p, const PhysParams& params)
{
    const double ell2 = params.ell_theta2();
    const double r2 = x * x / ell2 + p * p * ell2 / (params.theta * params.theta);
    return 2.0 * (n % 2 ? -1.0 : 1.0) * std::exp(-r2) * std::laguerre(static_cast<unsigned>(n), 2.0 * r2);
}

DropletReport droplet_density(int N, const PhysParams& params, const GridSpec& grid, int workers)
{
    if (N < 2) throw ValidationError("droplet needs N >= 2");
    DropletReport rep;
    rep.density = wigner_transform(Mat::Identity(N, N), params, grid, workers);
    const double ell = params.ell_theta();
    const double R = std::sqrt(2.0 * N) * ell;
    rep.expected_radius = R;
    rep.trace = rep.density.integral().real() / (2.0 * pi * ell * ell);

    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j)
            if (std::hypot(grid.x(i), grid.p(j) * ell * ell / params.theta) < 0.5 * R) {
                sum += rep.density.at(i, j).real();
                ++count;
            }
    if (count == 0) throw NumericalError(NumericalError::Kind::truncation, "grid too coarse to resolve the plateau");
    rep.plateau = sum / count;

    const double h = 0.25 * grid.dx();
    double prev_r = 0.5 * R, prev = rep.density.interpolate(prev_r, 0.0).real();
    rep.edge_radius = NAN;
    for (double r = prev_r + h; r < grid.half_x; r += h) {
        const double val = rep.density.interpolate(r, 0.0).real();
        if (val < 0.5 * rep.plateau) {
            rep.edge_radius = prev_r + (prev - 0.5 * rep.plateau) / (prev - val) * (r - prev_r);
            break;
        }
        prev_r = r;
        prev = val;
    }
    if (2.0 * R < grid.half_x)
        rep.tail_ratio = std::abs(rep.density.interpolate(2.0 * R, 0.0).real()) / rep.plateau;
    else
        rep.tail_ratio = NAN;
    return rep;
}

cplx DeformationSeries::operator()(cplx w, const PhysParams& params) const
{
    cplx v = 0.0, wn = 1.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        if (coeffs[n] != cplx(0.0)) v += mode_coefficient(static_cast<int>(n), N, params.ell_theta()) * coeffs[n] * wn;
        wn *= w;
    }
    return v;
}

double DeformationSeries::budget(const PhysParams& params) const
{
    const double R = std::sqrt(2.0 * N) * params.ell_theta();
    double b = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        if (coeffs[n] != cplx(0.0))
            b = std::max(b, mode_coefficient(static_cast<int>(n), N, params.ell_theta()) * std::abs(coeffs[n]) *
                                std::pow(R, double(n)));
    return b;
}

DeformationSeries single_mode(int n, double amplitude, int N, const PhysParams& params, double epsilon)
{
    if (n < 0 || n > N - 1) throw ValidationError("mode index out of range");
    DeformationSeries V;
    V.N = N;
    V.epsilon = epsilon;
    V.coeffs.assign(n + 1, 0.0);
    const double R = std::sqrt(2.0 * N) * params.ell_theta();
    V.coeffs[n] = amplitude / (mode_coefficient(n, N, params.ell_theta()) * std::pow(R, double(n)));
    return V;
}

VectorField displacement_field(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid)
{
    require_normalized(params);
    VectorField f{GridField(grid), GridField(grid), !V.within_budget(params)};
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j) {
            const cplx d = V(cplx(grid.x(i), grid.p(j)), params);
            f.vx.at(i, j) = d.real();
            f.vy.at(i, j) = d.imag();
        }
    return f;
}

VectorField velocity_field(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid)
{
    VectorField d = displacement_field(V, params, grid);
    VectorField v{GridField(grid), GridField(grid), d.budget_exceeded};
    const double w = params.omega;
    for (std::size_t k = 0; k < d.vx.values.size(); ++k) {
        v.vx.values[k] = w * d.vy.values[k];
        v.vy.values[k] = -w * d.vx.values[k];
    }
    return v;
}

GridField density_perturbation(const VectorField& dR, const PhysParams& params)
{
    const GridSpec& g = dR.vx.grid;
    const double rho0 = 1.0 / params.ell_theta2();
    GridField out(g);
    auto ddx = [&](int i, int j) {
        if (i == 0) return (dR.vx.at(1, j) - dR.vx.at(0, j)) / g.dx();
        if (i == g.nx - 1) return (dR.vx.at(i, j) - dR.vx.at(i - 1, j)) / g.dx();
        return (dR.vx.at(i + 1, j) - dR.vx.at(i - 1, j)) / (2.0 * g.dx());
    };
    auto ddp = [&](int i, int j) {
        if (j == 0) return (dR.vy.at(i, 1) - dR.vy.at(i, 0)) / g.dp();
        if (j == g.np - 1) return (dR.vy.at(i, j) - dR.vy.at(i, j - 1)) / g.dp();
        return (dR.vy.at(i, j + 1) - dR.vy.at(i, j - 1)) / (2.0 * g.dp());
    };
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.np; ++j) out.at(i, j) = -rho0 * (ddx(i, j) + ddp(i, j));
    return out;
}

GridField vorticity_from_density(const GridField& delta_rho, const PhysParams& params, double tol)
{
    double total = 0.0, mass = 0.0;
    for (const auto& v : delta_rho.values) {
        total += v.real();
        mass += std::abs(v.real());
    }
    if (std::abs(total) > tol * std::max(mass, 1e-300))
        throw ValidationError("density perturbation does not integrate to zero");
    return delta_rho * (params.theta / params.m);
}

CirculationReport circulation_check(const DeformationSeries& V, const PhysParams& params, const GridSpec& grid, double cx,
                                    double cp, double radius, int loop_points)
{
    CirculationReport rep;
    rep.budget_ok = V.within_budget(params);
    const VectorField dR = displacement_field(V, params, grid);
    const VectorField v = velocity_field(V, params, grid);
    const GridField drho = density_perturbation(dR, params);

    double circ = 0.0;
    for (int k = 0; k < loop_points; ++k) {
        const double phi = 2.0 * pi * k / loop_points;
        const double x = cx + radius * std::cos(phi), p = cp + radius * std::sin(phi);
        const double tx = -std::sin(phi), tp = std::cos(phi);
        circ += (v.vx.interpolate(x, p).real() * tx + v.vy.interpolate(x, p).real() * tp);
    }
    rep.circulation = circ * 2.0 * pi * radius / loop_points;

    using GL = boost::math::quadrature::gauss<double, 30>;
    const int nphi = 512;
    double area = 0.0;
    for (int k = 0; k < nphi; ++k) {
        const double phi = 2.0 * pi * k / nphi;
        const double c = std::cos(phi), s = std::sin(phi);
        area += GL::integrate([&](double r) { return r * drho.interpolate(cx + r * c, cp + r * s).real(); }, 0.0, radius);
    }
    area *= 2.0 * pi / nphi;
    rep.enclosed_vorticity = params.theta / params.m * area;
    const double scale = std::max(std::abs(rep.enclosed_vorticity), 1e-300);
    rep.relative_error = std::abs(rep.circulation - rep.enclosed_vorticity) / scale;
    return rep;
}

GridField density_from_jacobian(const ComplexMatrixState& s, const GridSpec& grid, int workers)
{
    const PhysParams& params = s.params;
    const int N = s.N();
    const GridField P = wigner_transform(Mat::Identity(N, N), params, grid, workers);
    const GridField X = wigner_transform(s.X(), params, grid, workers);
    const GridField Y = wigner_transform(s.Y(), params, grid, workers);
    GridField out(grid);
    const double hx = grid.dx(), hp = grid.dp();
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j) {
            if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.np - 1) {
                out.at(i, j) = NAN;
                continue;
            }
            const double Xx = (X.at(i + 1, j) - X.at(i - 1, j)).real() / (2 * hx);
            const double Xp = (X.at(i, j + 1) - X.at(i, j - 1)).real() / (2 * hp);
            const double Yx = (Y.at(i + 1, j) - Y.at(i - 1, j)).real() / (2 * hx);
            const double Yp = (Y.at(i, j + 1) - Y.at(i, j - 1)).real() / (2 * hp);
            const double J = Xx * Yp - Xp * Yx;
            out.at(i, j) = P.at(i, j).real() / J;
        }
    return out;
}

}  // namespace calolab
