#include "calolab/jack.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace calolab {

namespace {

constexpr int max_degree = 8;

void check_degree(int n)
{
    if (n < 0 || n > max_degree) throw ValidationError("symmetric function degree exceeds the guard of 8");
}

// Ascending lexicographic order, a linear extension of dominance.
std::vector<Partition> ascending(int n)
{
    auto ps = partitions_of(n);
    std::reverse(ps.begin(), ps.end());
    return ps;
}

long assign(const Partition& rho, std::size_t i, std::vector<int>& room)
{
    if (i == rho.size()) {
        for (int r : room)
            if (r) return 0;
        return 1;
    }
    long c = 0;
    for (auto& r : room)
        if (r >= rho[i]) {
            r -= rho[i];
            c += assign(rho, i + 1, room);
            r += rho[i];
        }
    return c;
}

using RMat = std::vector<std::vector<Rational>>;

RMat invert(RMat A)
{
    const std::size_t n = A.size();
    RMat I(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && A[piv][c] == 0) ++piv;
        if (piv == n) throw NumericalError(NumericalError::Kind::singular, "transition matrix is singular");
        std::swap(A[piv], A[c]);
        std::swap(I[piv], I[c]);
        const Rational inv = Rational(1) / A[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            A[c][k] *= inv;
            I[c][k] *= inv;
        }
        for (std::size_t r = 0; r < n; ++r)
            if (r != c && A[r][c] != 0) {
                const Rational f = A[r][c];
                for (std::size_t k = 0; k < n; ++k) {
                    A[r][k] -= f * A[c][k];
                    I[r][k] -= f * I[c][k];
                }
            }
    }
    return I;
}

// Row mu of the inverse transition: m_mu = sum_rho inv[mu][rho] p_rho (ascending order).
const RMat& monomial_to_power(int n)
{
    static std::map<int, RMat> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const auto ps = ascending(n);
    RMat L(ps.size(), std::vector<Rational>(ps.size()));
    for (std::size_t r = 0; r < ps.size(); ++r)
        for (std::size_t m = 0; m < ps.size(); ++m) L[r][m] = power_to_monomial(ps[r], ps[m]);
    // p = L m  =>  m = L^{-1} p
    return cache.emplace(n, invert(L)).first->second;
}

Rational rpow(const Rational& a, int k)
{
    Rational r = 1;
    for (int i = 0; i < k; ++i) r *= a;
    return r;
}

long count_strips(const Partition& shape, const Partition& mu, int i)
{
    if (i < 0) return shape.empty() ? 1 : 0;
    const int target = weight(shape) - mu[i];
    if (target < 0) return 0;
    // nu interlaces shape: shape[j+1] <= nu[j] <= shape[j]
    long total = 0;
    Partition nu(shape.size());
    std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
        if (j == shape.size()) {
            if (left == 0) {
                Partition t;
                for (int x : nu)
                    if (x > 0) t.push_back(x);
                total += count_strips(t, mu, i - 1);
            }
            return;
        }
        const int lo = j + 1 < shape.size() ? shape[j + 1] : 0;
        for (int v = std::min(shape[j], left); v >= lo; --v) {
            nu[j] = v;
            rec(j + 1, left - v);
        }
    };
    rec(0, target);
    return total;
}

}  // namespace

Rational SymmetricFunctionExpansion::coeff(const Partition& p) const
{
    auto it = coeffs.find(p);
    return it == coeffs.end() ? Rational(0) : it->second;
}

std::string SymmetricFunctionExpansion::to_json() const
{
    nlohmann::ordered_json j;
    j["basis"] = basis == SymBasis::monomial ? "monomial" : "power_sum";
    j["degree"] = degree;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : partitions_of(degree)) {
        const Rational c = coeff(p);
        if (c == 0) continue;
        arr.push_back({{"partition", p}, {"coefficient", c.str()}});
    }
    j["coefficients"] = arr;
    return j.dump();
}

Rational to_rational(double x)
{
    if (!std::isfinite(x)) throw ValidationError("non-finite Jack parameter");
    int e = 0;
    const double m = std::frexp(x, &e);
    const auto mant = static_cast<long long>(std::ldexp(m, 53));
    Rational r(mant);
    e -= 53;
    const Rational two = 2;
    return e >= 0 ? r * rpow(two, e) : r / rpow(two, -e);
}

Rational z_factor(const Partition& p)
{
    Rational z = 1;
    std::map<int, int> mult;
    for (int x : p) ++mult[x];
    for (auto [part, m] : mult)
        for (int k = 1; k <= m; ++k) z *= Rational(part * k);
    return z;
}

long power_to_monomial(const Partition& rho, const Partition& mu)
{
    if (weight(rho) != weight(mu)) return 0;
    std::vector<int> room(mu.begin(), mu.end());
    return assign(rho, 0, room);
}

SymmetricFunctionExpansion to_power_sums(const SymmetricFunctionExpansion& f)
{
    if (f.basis == SymBasis::power_sum) return f;
    check_degree(f.degree);
    const auto ps = ascending(f.degree);
    const RMat& inv = monomial_to_power(f.degree);
    SymmetricFunctionExpansion g;
    g.basis = SymBasis::power_sum;
    g.degree = f.degree;
    for (std::size_t r = 0; r < ps.size(); ++r) {
        Rational c = 0;
        for (std::size_t m = 0; m < ps.size(); ++m) c += f.coeff(ps[m]) * inv[m][r];
        if (c != 0) g.coeffs[ps[r]] = c;
    }
    return g;
}

SymmetricFunctionExpansion to_monomials(const SymmetricFunctionExpansion& f)
{
    if (f.basis == SymBasis::monomial) return f;
    check_degree(f.degree);
    SymmetricFunctionExpansion g;
    g.degree = f.degree;
    for (const auto& mu : partitions_of(f.degree)) {
        Rational c = 0;
        for (const auto& [rho, v] : f.coeffs) c += v * power_to_monomial(rho, mu);
        if (c != 0) g.coeffs[mu] = c;
    }
    return g;
}

Rational jack_inner(const SymmetricFunctionExpansion& f, const SymmetricFunctionExpansion& g, const Rational& alpha)
{
    if (f.degree != g.degree) return 0;
    const auto pf = to_power_sums(f), pg = to_power_sums(g);
    Rational s = 0;
    for (const auto& [rho, v] : pf.coeffs) {
        const Rational w = pg.coeff(rho);
        if (w != 0) s += v * w * z_factor(rho) * rpow(alpha, static_cast<int>(rho.size()));
    }
    return s;
}

SymmetricFunctionExpansion jack_expand(const Partition& lambda, const Rational& alpha)
{
    const int n = weight(lambda);
    check_degree(n);
    if (alpha <= 0) throw ValidationError("Jack parameter must be positive");
    const auto ps = ascending(n);
    const RMat& inv = monomial_to_power(n);
    const std::size_t D = ps.size();
    // Gram matrix of monomials under the alpha product.
    std::vector<Rational> zw(D);
    for (std::size_t r = 0; r < D; ++r) zw[r] = z_factor(ps[r]) * rpow(alpha, static_cast<int>(ps[r].size()));
    RMat G(D, std::vector<Rational>(D));
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = a; b < D; ++b) {
            Rational s = 0;
            for (std::size_t r = 0; r < D; ++r)
                if (inv[a][r] != 0 && inv[b][r] != 0) s += inv[a][r] * inv[b][r] * zw[r];
            G[a][b] = G[b][a] = s;
        }
    // P_k = m_k - sum_{j<k} <m_k, P_j>/<P_j, P_j> P_j, stored as monomial coefficient rows.
    const std::size_t target = std::find(ps.begin(), ps.end(), lambda) - ps.begin();
    RMat P;
    std::vector<Rational> norms;
    auto inner = [&](const std::vector<Rational>& u, const std::vector<Rational>& v) {
        Rational s = 0;
        for (std::size_t a = 0; a < D; ++a) {
            if (u[a] == 0) continue;
            for (std::size_t b = 0; b < D; ++b)
                if (v[b] != 0) s += u[a] * v[b] * G[a][b];
        }
        return s;
    };
    for (std::size_t k = 0; k <= target; ++k) {
        std::vector<Rational> row(D, Rational(0));
        row[k] = 1;
        std::vector<Rational> mk = row;
        for (std::size_t j = 0; j < k; ++j) {
            const Rational c = inner(mk, P[j]) / norms[j];
            if (c == 0) continue;
            for (std::size_t a = 0; a < D; ++a) row[a] -= c * P[j][a];
        }
        norms.push_back(inner(row, row));
        P.push_back(std::move(row));
    }
    SymmetricFunctionExpansion out;
    out.degree = n;
    for (std::size_t a = 0; a < D; ++a)
        if (P[target][a] != 0) out.coeffs[ps[a]] = P[target][a];
    return out;
}

SymmetricFunctionExpansion jack_expand(const Partition& lambda, double alpha) { return jack_expand(lambda, to_rational(alpha)); }

bool dominates(const Partition& mu, const Partition& lambda)
{
    if (weight(mu) != weight(lambda)) return false;
    int a = 0, b = 0;
    for (std::size_t i = 0; i < std::max(mu.size(), lambda.size()); ++i) {
        a += i < mu.size() ? mu[i] : 0;
        b += i < lambda.size() ? lambda[i] : 0;
        if (a < b) return false;
    }
    return true;
}

long kostka(const Partition& lambda, const Partition& mu)
{
    if (weight(lambda) != weight(mu)) return 0;
    return count_strips(lambda, mu, static_cast<int>(mu.size()) - 1);
}

SymmetricFunctionExpansion schur_expand(const Partition& lambda)
{
    const int n = weight(lambda);
    check_degree(n);
    SymmetricFunctionExpansion s;
    s.degree = n;
    for (const auto& mu : partitions_of(n)) {
        const long k = kostka(lambda, mu);
        if (k) s.coeffs[mu] = k;
    }
    return s;
}

JackEmbedding natural_embedding(double alpha, const PhysParams& params, double sign)
{
    if (!(alpha > 0.0)) throw ValidationError("Jack parameter must be positive");
    return {std::sqrt(alpha) / params.ell_hbar(), sign};
}

Eigen::VectorXd embed_fock(const SymmetricFunctionExpansion& f, const FockBasis& b, const PhysParams& params,
                           const JackEmbedding& e)
{
    if (f.degree > b.Lambda) throw ValidationError("expansion degree exceeds the truncation level");
    const auto p = to_power_sums(f);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(b.dim());
    for (const auto& [rho, c] : p.coeffs) {
        // prod_n (s alpha_n^dag)^{m_n} |0> = prod_n s^{m_n} sqrt(m_n! (n l_h^2)^{m_n}) |rho>
        double amp = static_cast<double>(c);
        std::map<int, int> mult;
        for (int x : rho) ++mult[x];
        for (auto [n, m] : mult)
            for (int k = 1; k <= m; ++k) amp *= e.sign * e.scale * std::sqrt(k * n * params.ell_hbar2());
        v(b.find(rho)) += amp;
    }
    return v;
}

EigenvectorCheck verify_eigenvector(const Partition& lambda, double alpha, const SparseOperator& I2, const FockBasis& b,
                                    int N, const PhysParams& params, const JackEmbedding& e, double label_tol)
{
    if (weight(lambda) > std::min(b.Lambda, 6)) throw ValidationError("partition weight exceeds min(Lambda, 6)");
    EigenvectorCheck c;
    c.lambda = lambda;
    const Eigen::VectorXd v = embed_fock(jack_expand(lambda, alpha), b, params, e);
    const double nv = v.norm();
    if (!(nv > 0.0)) throw NumericalError(NumericalError::Kind::truncation, "embedded vector vanishes");
    const Eigen::VectorXd Hv = I2.mat * v;
    c.rayleigh = v.dot(Hv) / (nv * nv);
    c.residual = (Hv - c.rayleigh * v).norm() / nv;
    c.q2 = q2_prediction(lambda, N, params);
    c.q2_transposed = q2_prediction(transpose(lambda), N, params);
    c.exact = i2_exact_eigenvalue(lambda, N, params);
    c.exact_transposed = i2_exact_eigenvalue(transpose(lambda), N, params);
    const double tol = label_tol * std::max(1.0, std::abs(c.rayleigh));
    auto label = [&](double direct, double dual) {
        const bool a = std::abs(direct - c.rayleigh) <= tol, t = std::abs(dual - c.rayleigh) <= tol;
        return std::string(a && t ? "both" : a ? "lambda" : t ? "transpose" : "none");
    };
    c.q2_label = label(c.q2, c.q2_transposed);
    c.exact_label = label(c.exact, c.exact_transposed);
    return c;
}

JackCalibration calibrate_jack(int N, const PhysParams& params, int fit_level, int validate_level)
{
    if (fit_level < 1 || validate_level < fit_level || validate_level > 6) throw ValidationError("bad calibration window");
    const FockBasis b = enumerate_basis(validate_level);
    const SparseOperator I2 = build_I2(b, N, params);
    const double r = params.ell_hbar2() / params.ell_theta2();
    JackCalibration best;
    best.fit_residual = INFINITY;
    for (auto [alpha, name] : {std::pair{r, "lh2/lt2"}, std::pair{1.0 / r, "lt2/lh2"}})
        for (double sign : {1.0, -1.0}) {
            const JackEmbedding e = natural_embedding(alpha, params, sign);
            double worst = 0.0;
            for (int l = 1; l <= fit_level; ++l)
                for (const auto& p : partitions_of(l))
                    worst = std::max(worst, verify_eigenvector(p, alpha, I2, b, N, params, e).residual);
            if (std::isinf(best.fit_residual) || (best.fit_residual > 1e-10 && worst < best.fit_residual)) {
                best.fit_residual = worst;
                best.alpha = alpha;
                best.alpha_map = name;
                best.sign = sign;
            }
        }
    const JackEmbedding e = natural_embedding(best.alpha, params, best.sign);
    for (int l = 1; l <= validate_level; ++l)
        for (const auto& p : partitions_of(l)) {
            best.checks.push_back(verify_eigenvector(p, best.alpha, I2, b, N, params, e));
            if (l > fit_level) best.validation_residual = std::max(best.validation_residual, best.checks.back().residual);
        }
    return best;
}

}  // namespace calolab
