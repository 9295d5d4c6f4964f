#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "calolab/jack.hpp"

using namespace calolab;

namespace {

Rational R(long n, long d = 1) { return Rational(n) / d; }

PhysParams params(double lt, double lh)
{
    PhysParams p;
    p.theta = lt * lt;
    p.hbar = lh * lh;
    return p;
}

}  // namespace

TEST_CASE("rational helpers")
{
    CHECK(to_rational(0.5) == R(1, 2));
    CHECK(to_rational(0.1) != R(1, 10));
    CHECK(to_rational(-3.0) == R(-3));
    CHECK(z_factor({2, 1, 1}) == R(4));
    CHECK(z_factor({3}) == R(3));
    CHECK(z_factor({1, 1, 1}) == R(6));
}

TEST_CASE("power sums in the monomial basis")
{
    // p_1^2 = m_2 + 2 m_11, p_1^3 = m_3 + 3 m_21 + 6 m_111, p_2 p_1 = m_3 + m_21
    CHECK(power_to_monomial({1, 1}, {2}) == 1);
    CHECK(power_to_monomial({1, 1}, {1, 1}) == 2);
    CHECK(power_to_monomial({1, 1, 1}, {2, 1}) == 3);
    CHECK(power_to_monomial({1, 1, 1}, {1, 1, 1}) == 6);
    CHECK(power_to_monomial({2, 1}, {2, 1}) == 1);
    CHECK(power_to_monomial({2, 1}, {1, 1, 1}) == 0);

    SymmetricFunctionExpansion f;
    f.degree = 4;
    f.coeffs = {{{2, 2}, R(3)}, {{3, 1}, R(-1, 2)}, {{1, 1, 1, 1}, R(5)}};
    const auto back = to_monomials(to_power_sums(f));
    for (const auto& mu : partitions_of(4)) CHECK(back.coeff(mu) == f.coeff(mu));
}

TEST_CASE("dominance and Kostka numbers")
{
    CHECK(dominates({3, 1}, {2, 2}));
    CHECK_FALSE(dominates({2, 2}, {3, 1}));
    CHECK_FALSE(dominates({3, 1, 1, 1}, {2, 2, 2}));
    CHECK_FALSE(dominates({2, 2, 2}, {3, 1, 1, 1}));
    CHECK(kostka({3, 1}, {1, 1, 1, 1}) == 3);
    CHECK(kostka({2, 2}, {1, 1, 1, 1}) == 2);
    CHECK(kostka({2, 1}, {2, 1}) == 1);
    CHECK(kostka({2, 1}, {3}) == 0);
    const auto s = schur_expand({2, 1});
    CHECK(s.coeff({2, 1}) == 1);
    CHECK(s.coeff({1, 1, 1}) == 2);
    CHECK(s.coeff({3}) == 0);
}

TEST_CASE("low-degree Jack polynomials in closed form")
{
    for (const Rational a : {R(1), R(3), R(1, 2), R(7, 3)}) {
        const auto p2 = jack_expand({2}, a);
        CHECK(p2.coeff({2}) == 1);
        CHECK(p2.coeff({1, 1}) == R(2) / (1 + a));
        const auto p21 = jack_expand({2, 1}, a);
        CHECK(p21.coeff({3}) == 0);
        CHECK(p21.coeff({2, 1}) == 1);
        CHECK(p21.coeff({1, 1, 1}) == R(6) / (a + 2));
        const auto p3 = jack_expand({3}, a);
        CHECK(p3.coeff({2, 1}) == R(3) / (1 + 2 * a));
        CHECK(p3.coeff({1, 1, 1}) == R(6) / ((1 + a) * (1 + 2 * a)));
        CHECK(jack_expand({1, 1, 1}, a).coeff({1, 1, 1}) == 1);
    }
    CHECK(jack_expand({2}, 3.0).coeff({1, 1}) == R(1, 2));
}

TEST_CASE("Jack polynomials are orthogonal and reduce to Schur functions")
{
    const Rational a(5, 2);
    const auto parts = partitions_of(4);
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            CHECK(jack_inner(jack_expand(parts[i], a), jack_expand(parts[j], a), a) == 0);
    for (int n = 1; n <= 5; ++n)
        for (const auto& l : partitions_of(n)) {
            const auto j = jack_expand(l, R(1)), s = schur_expand(l);
            for (const auto& mu : partitions_of(n)) CHECK(j.coeff(mu) == s.coeff(mu));
        }
    CHECK_THROWS_AS(jack_expand(Partition{9}, R(1)), ValidationError);
}

TEST_CASE("Jack states diagonalize the cubic invariant")
{
    for (auto [lt, lh] : {std::pair{1.0, 1.0}, std::pair{1.0, 1.5}, std::pair{1.1, 0.7}}) {
        const PhysParams p = params(lt, lh);
        const JackCalibration c = calibrate_jack(8, p, 3, 4);
        CHECK(c.alpha == doctest::Approx(lh * lh / (lt * lt)).epsilon(1e-12));
        CHECK(c.fit_residual < 1e-10);
        CHECK(c.validation_residual < 1e-10);
        for (const auto& k : c.checks) {
            CHECK(k.residual < 1e-10);
            CHECK(k.exact_label != "none");
        }
    }
    const PhysParams p = params(1.0, 1.5);
    const FockBasis b = enumerate_basis(4);
    const SparseOperator I2 = build_I2(b, 8, p);
    const double alpha = 2.25;
    const EigenvectorCheck ok = verify_eigenvector({2, 1}, alpha, I2, b, 8, p, natural_embedding(alpha, p));
    CHECK(ok.residual < 1e-10);
    const EigenvectorCheck bad = verify_eigenvector({2, 1}, 1.0 / alpha, I2, b, 8, p, natural_embedding(1.0 / alpha, p));
    CHECK(bad.residual > 1e-3);
}

TEST_CASE("expansion json")
{
    const auto j = jack_expand({1, 1}, R(2)).to_json();
    CHECK(j.find("\"degree\"") != std::string::npos);
}
