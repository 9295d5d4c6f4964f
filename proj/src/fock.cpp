#include "calolab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "calolab/report.hpp"

namespace calolab {

namespace {

void partitions_rec(int n, int maxp, Partition& cur, std::vector<Partition>& out)
{
    if (n == 0) {
        out.push_back(cur);
        return;
    }
    for (int k = std::min(n, maxp); k >= 1; --k) {
        cur.push_back(k);
        partitions_rec(n - k, k, cur, out);
        cur.pop_back();
    }
}

int multiplicity(const Partition& p, int n) { return static_cast<int>(std::count(p.begin(), p.end(), n)); }

Partition add_part(Partition p, int n)
{
    p.insert(std::upper_bound(p.begin(), p.end(), n, std::greater<int>()), n);
    return p;
}

Partition remove_part(Partition p, int n)
{
    p.erase(std::find(p.begin(), p.end(), n));
    return p;
}

SparseMat identity(int dim)
{
    SparseMat I(dim, dim);
    I.setIdentity();
    return I;
}

}  // namespace

int weight(const Partition& p)
{
    int w = 0;
    for (int x : p) w += x;
    return w;
}

Partition transpose(const Partition& p)
{
    Partition t;
    if (p.empty()) return t;
    for (int j = 1; j <= p.front(); ++j) {
        int c = 0;
        for (int x : p) c += x >= j;
        t.push_back(c);
    }
    return t;
}

std::string partition_label(const Partition& p)
{
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + ")";
}

std::vector<Partition> partitions_of(int n)
{
    if (n < 0) throw ValidationError("partition weight must be >= 0");
    std::vector<Partition> out;
    Partition cur;
    partitions_rec(n, n, cur, out);
    return out;
}

int FockBasis::find(const Partition& p) const
{
    auto it = index.find(p);
    return it == index.end() ? -1 : it->second;
}

FockBasis enumerate_basis(int Lambda)
{
    if (Lambda < 0) throw ValidationError("truncation level must be >= 0");
    FockBasis b;
    b.Lambda = Lambda;
    for (int l = 0; l <= Lambda; ++l) {
        b.level_begin.push_back(b.dim());
        for (auto& p : partitions_of(l)) {
            b.index.emplace(p, b.dim());
            b.states.push_back(std::move(p));
        }
    }
    b.level_begin.push_back(b.dim());
    return b;
}

Eigen::MatrixXd SparseOperator::block(const FockBasis& b, int level) const
{
    const int target = level + shift;
    if (level < 0 || level > b.Lambda || target < 0 || target > b.Lambda) throw ValidationError("level outside the truncation");
    const Eigen::MatrixXd dense = Eigen::MatrixXd(mat);
    return dense.block(b.level_begin[target], b.level_begin[level], b.level_size(target), b.level_size(level));
}

SparseOperator mode_operator(const FockBasis& b, int n, ModeKind kind, const PhysParams& params, double scale)
{
    if (n < 1 || n > b.Lambda) throw ValidationError("mode index out of range");
    const double unit = scale * n * params.ell_hbar2();
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < b.dim(); ++i) {
        const Partition& p = b.states[i];
        const int k = multiplicity(p, n);
        if (kind == ModeKind::lower && k > 0)
            t.emplace_back(b.find(remove_part(p, n)), i, std::sqrt(unit * k));
        if (kind == ModeKind::raise && weight(p) + n <= b.Lambda)
            t.emplace_back(b.find(add_part(p, n)), i, std::sqrt(unit * (k + 1)));
    }
    SparseOperator op;
    op.name = std::string(kind == ModeKind::raise ? "alpha_dag_" : "alpha_") + std::to_string(n);
    op.shift = kind == ModeKind::raise ? n : -n;
    op.mat.resize(b.dim(), b.dim());
    op.mat.setFromTriplets(t.begin(), t.end());
    return op;
}

SparseOperator build_I1(const FockBasis& b, int N, const PhysParams& params, double scale)
{
    if (b.Lambda < 1) throw ValidationError("I1 needs truncation level >= 1");
    SparseOperator op;
    op.name = "I1";
    op.mat = identity(b.dim()) * ((N + 1) * (params.ell_theta2() * N + params.ell_hbar2()));
    for (int n = 1; n <= b.Lambda; ++n)
        op.mat += mode_operator(b, n, ModeKind::raise, params, scale).mat * mode_operator(b, n, ModeKind::lower, params, scale).mat;
    return op;
}

SparseOperator build_I2(const FockBasis& b, int N, const PhysParams& params, const I2Calibration& C)
{
    if (b.Lambda < 2) throw ValidationError("I2 needs truncation level >= 2");
    const double lt = params.ell_theta(), lt2 = params.ell_theta2(), lh2 = params.ell_hbar2();
    std::vector<SparseMat> lo(b.Lambda + 1), hi(b.Lambda + 1);
    for (int n = 1; n <= b.Lambda; ++n) {
        lo[n] = mode_operator(b, n, ModeKind::lower, params).mat;
        hi[n] = mode_operator(b, n, ModeKind::raise, params).mat;
    }
    SparseMat cubic(b.dim(), b.dim()), number(b.dim(), b.dim()), graded(b.dim(), b.dim());
    for (int m = 1; m <= b.Lambda; ++m)
        for (int n = 1; m + n <= b.Lambda; ++n) cubic += SparseMat(hi[m + n] * SparseMat(lo[m] * lo[n]));
    for (int n = 1; n <= b.Lambda; ++n) {
        const SparseMat nn = hi[n] * lo[n];
        number += nn;
        graded += nn * double(n);
    }
    SparseOperator op;
    op.name = "I2";
    op.mat = lt * (cubic + SparseMat(cubic.transpose())) - (lt2 + C.c2 * lh2) * graded + (N * lt2 + C.c3 * lh2) * number +
             identity(b.dim()) * (C.c4 * lh2 * lh2);
    op.mat.prune(0.0);
    op.calibration = {{"C2", C.c2}, {"C3", C.c3}, {"C4", C.c4}};
    return op;
}

double q1_prediction(const Partition& p, int N, const PhysParams& params)
{
    return params.ell_hbar2() * weight(p) + (N + 1) * (params.ell_theta2() * N + params.ell_hbar2());
}

double q1_weighted_variant(const Partition& p, int N, const PhysParams& params)
{
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += double(i + 1) * p[i];
    return params.ell_hbar2() * s + (N + 1) * (params.ell_theta2() * N + params.ell_hbar2());
}

double q2_prediction(const Partition& p, int N, const PhysParams& params)
{
    const double lt2 = params.ell_theta2(), r = params.ell_hbar2() / lt2;
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double li = p[i];
        s += (N + r * (1.0 - 2.0 * (i + 1))) * li - li * li;
    }
    return lt2 * s;
}

double i2_exact_eigenvalue(const Partition& p, int N, const PhysParams& params)
{
    const double lt2 = params.ell_theta2(), lh2 = params.ell_hbar2();
    double lin = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        lin += (N + 1.0 - 2.0 * (i + 1)) * p[i];
        sq += double(p[i]) * p[i];
    }
    return lh2 * (lt2 * lin + lh2 * sq);
}

std::string SpectrumReport::csv() const
{
    CsvTable t({"level", "partition", "eigenvalue", "predicted", "residual", "degenerate"});
    for (const auto& r : rows)
        t.add_row({std::to_string(r.level), partition_label(r.partition), fmt_num(r.eigenvalue), fmt_num(r.predicted),
                   fmt_num(r.residual), r.degenerate ? "1" : "0"});
    return t.str();
}

SpectrumReport diagonalize_and_match(const SparseOperator& op, const FockBasis& b, int level, const Predictor& predict,
                                     double degeneracy_tol)
{
    return diagonalize_and_match(op, b, level, level, predict, degeneracy_tol);
}

SpectrumReport diagonalize_and_match(const SparseOperator& op, const FockBasis& b, int min_level, int max_level,
                                     const Predictor& predict, double degeneracy_tol)
{
    if (op.shift != 0) throw ValidationError("only level-preserving operators have a spectrum per level");
    if (min_level < 0 || max_level > b.Lambda || min_level > max_level) throw ValidationError("level outside the truncation");
    SpectrumReport rep;
    rep.constants = op.calibration;
    for (int level = min_level; level <= max_level; ++level) {
        const Eigen::MatrixXd H = op.block(b, level);
        if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff()))
            throw ValidationError("operator block is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError(NumericalError::Kind::non_convergence, "eigensolver failed");
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + H.rows());
        std::vector<std::pair<double, Partition>> pred;
        for (int i = b.level_begin[level]; i < b.level_begin[level + 1]; ++i) pred.emplace_back(predict(b.states[i]), b.states[i]);
        std::stable_sort(pred.begin(), pred.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
        std::sort(ev.begin(), ev.end());
        for (std::size_t k = 0; k < ev.size(); ++k) {
            SpectrumRow r;
            r.level = level;
            r.partition = pred[k].second;
            r.eigenvalue = ev[k];
            r.predicted = pred[k].first;
            r.residual = ev[k] - pred[k].first;
            const double tol = degeneracy_tol * std::max(1.0, std::abs(r.predicted));
            r.degenerate = (k > 0 && std::abs(pred[k - 1].first - r.predicted) <= tol) ||
                           (k + 1 < pred.size() && std::abs(pred[k + 1].first - r.predicted) <= tol);
            rep.degeneracies += r.degenerate;
            rep.max_residual = std::max(rep.max_residual, std::abs(r.residual));
            rep.rows.push_back(std::move(r));
        }
    }
    return rep;
}

I2Fit calibrate_I2(int N, const PhysParams& params, const Predictor& target, int fit_level, int validate_level)
{
    if (fit_level < 2 || validate_level < fit_level) throw ValidationError("bad calibration window");
    const FockBasis b = enumerate_basis(validate_level);
    const double lh4 = params.ell_hbar2() * params.ell_hbar2();

    // For fixed C2 the C3, C4 terms shift each level rigidly, so the best pair
    // follows from a two-column least-squares problem.
    auto solve_linear = [&](double c2, I2Calibration& C) {
        I2Calibration base{c2, 0.0, 0.0};
        const SpectrumReport rep = diagonalize_and_match(build_I2(b, N, params, base), b, 0, fit_level, target);
        Eigen::MatrixXd A(rep.rows.size(), 2);
        Eigen::VectorXd y(rep.rows.size());
        for (std::size_t k = 0; k < rep.rows.size(); ++k) {
            A(k, 0) = lh4 * rep.rows[k].level;
            A(k, 1) = lh4;
            y(k) = -rep.rows[k].residual;
        }
        const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
        C = {c2, c(0), c(1)};
        return (A * c - y).squaredNorm();
    };

    double best = INFINITY, best_c2 = -1.0;
    I2Calibration C;
    for (double c2 = -10.0; c2 <= 10.0; c2 += 0.5) {
        const double f = solve_linear(c2, C);
        if (f < best) {
            best = f;
            best_c2 = c2;
        }
    }
    const auto r = boost::math::tools::brent_find_minima([&](double c2) { return solve_linear(c2, C); }, best_c2 - 0.5,
                                                          best_c2 + 0.5, 52);
    solve_linear(r.first, C);

    I2Fit fit;
    fit.constants = C;
    fit.report = diagonalize_and_match(build_I2(b, N, params, C), b, 0, validate_level, target);
    for (const auto& row : fit.report.rows) {
        double& slot = row.level <= fit_level ? fit.fit_residual : fit.validation_residual;
        slot = std::max(slot, std::abs(row.residual));
    }
    return fit;
}

double virasoro_beta(const PhysParams& params)
{
    const double x = params.ell_theta() / params.ell_hbar();
    return (1.0 / x - x) / std::sqrt(2.0);
}

double central_charge_prediction(const PhysParams& params)
{
    const double b = virasoro_beta(params);
    return 1.0 - 12.0 * b * b;
}

VirasoroSystem make_virasoro(int Lambda, const PhysParams& params)
{
    if (Lambda < 2) throw ValidationError("Virasoro system needs truncation level >= 2");
    if (!(params.hbar > 0.0)) throw ValidationError("Virasoro generators need hbar > 0");
    VirasoroSystem v;
    v.basis = enumerate_basis(Lambda);
    v.beta = virasoro_beta(params);
    PhysParams unit = params;
    unit.hbar = 1.0;  // l_h = 1 in normalized units: b_n = alpha_n / l_h
    unit.m = 1.0 / unit.omega;
    v.lower.resize(Lambda + 1);
    v.raise.resize(Lambda + 1);
    for (int n = 1; n <= Lambda; ++n) {
        v.lower[n] = mode_operator(v.basis, n, ModeKind::lower, unit).mat;
        v.raise[n] = mode_operator(v.basis, n, ModeKind::raise, unit).mat;
    }
    return v;
}

SparseMat VirasoroSystem::mode(int n) const
{
    if (n == 0 || std::abs(n) > basis.Lambda) {
        SparseMat z(basis.dim(), basis.dim());
        return z;
    }
    return n > 0 ? lower[n] : raise[-n];
}

SparseMat VirasoroSystem::L(int n) const
{
    if (n == 0) return L0();
    const int Lambda = basis.Lambda;
    if (std::abs(n) > Lambda) throw ValidationError("Virasoro index out of range");
    SparseMat out(basis.dim(), basis.dim());
    // Half sum over k + l = n; each unordered pair once with the smaller
    // (possibly creation) index on the left.
    for (int k = -Lambda; k <= Lambda; ++k) {
        const int l = n - k;
        if (k == 0 || l == 0 || k > l || std::abs(l) > Lambda) continue;
        out += (k == l ? 0.5 : 1.0) * SparseMat(mode(k) * mode(l));
    }
    out += (beta * n) * mode(n);
    out.prune(0.0);
    return out;
}

SparseMat VirasoroSystem::L0() const
{
    SparseMat out(basis.dim(), basis.dim());
    for (int n = 1; n <= basis.Lambda; ++n) out += SparseMat(raise[n] * lower[n]);
    out += identity(basis.dim()) * (-0.5 * beta * beta);
    return out;
}

VirasoroDefect virasoro_defect(const VirasoroSystem& v, int m, int n)
{
    VirasoroDefect d;
    d.m = m;
    d.n = n;
    d.trusted_level = v.basis.Lambda + std::min({0, m, n, m + n});
    if (m == 0 && n == 0) throw ValidationError("commutator of L0 with itself is trivial");
    if (d.trusted_level < 2 || v.basis.Lambda - std::abs(m) - std::abs(n) < 2)
        throw ValidationError("truncation too small for the requested commutator");
    const SparseMat Lm = v.L(m), Ln = v.L(n);
    SparseMat D = SparseMat(Lm * Ln) - SparseMat(Ln * Lm) - (m - n) * v.L(m + n);
    const int cols = v.basis.level_begin[d.trusted_level + 1];
    const Eigen::MatrixXd dense = Eigen::MatrixXd(D).leftCols(cols);
    if (m + n == 0) {
        double trace = 0.0;
        for (int i = 0; i < cols; ++i) trace += dense(i, i);
        d.central_term = trace / cols;
        Eigen::MatrixXd rest = dense;
        for (int i = 0; i < cols; ++i) rest(i, i) -= d.central_term;
        d.defect_norm = rest.cwiseAbs().maxCoeff();
        const double k = double(m) * (double(m) * m - 1.0);
        if (k != 0.0) d.c_measured = 12.0 * d.central_term / k;
    } else {
        d.defect_norm = dense.cwiseAbs().maxCoeff();
    }
    return d;
}

}  // namespace calolab
