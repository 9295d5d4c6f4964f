#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "calolab/fock.hpp"

namespace calolab {

using Rational = boost::multiprecision::cpp_rational;

enum class SymBasis { monomial, power_sum };

struct SymmetricFunctionExpansion {
    SymBasis basis = SymBasis::monomial;
    int degree = 0;
    std::map<Partition, Rational> coeffs;

    Rational coeff(const Partition& p) const;
    std::string to_json() const;
};

Rational to_rational(double x);  // exact binary value

// z_lambda = prod_i i^{m_i} m_i!
Rational z_factor(const Partition& p);

// Coefficient of m_mu in p_rho.
long power_to_monomial(const Partition& rho, const Partition& mu);

SymmetricFunctionExpansion to_power_sums(const SymmetricFunctionExpansion& f);
SymmetricFunctionExpansion to_monomials(const SymmetricFunctionExpansion& f);

// <f, g>_alpha with <p_rho, p_sigma> = delta z_rho alpha^{l(rho)}.
Rational jack_inner(const SymmetricFunctionExpansion& f, const SymmetricFunctionExpansion& g, const Rational& alpha);

// Monic Jack polynomial P_lambda^{(alpha)} in the monomial basis, by
// Gram-Schmidt in increasing lexicographic order.
SymmetricFunctionExpansion jack_expand(const Partition& lambda, const Rational& alpha);
SymmetricFunctionExpansion jack_expand(const Partition& lambda, double alpha);

// Schur function via Kostka numbers (semistandard tableau counting).
long kostka(const Partition& lambda, const Partition& mu);
SymmetricFunctionExpansion schur_expand(const Partition& lambda);

// Is mu >= lambda in dominance order?
bool dominates(const Partition& mu, const Partition& lambda);

// p_n -> sign * scale * alpha_n^dagger acting on the vacuum.
struct JackEmbedding {
    double scale = 1.0;
    double sign = 1.0;
};

// scale = sqrt(alpha) / l_h, which makes the embedded power sums carry the alpha inner product.
JackEmbedding natural_embedding(double alpha, const PhysParams& params, double sign = 1.0);

Eigen::VectorXd embed_fock(const SymmetricFunctionExpansion& f, const FockBasis& b, const PhysParams& params,
                           const JackEmbedding& e);

struct EigenvectorCheck {
    Partition lambda;
    double residual = 0.0;       // |I2 v - q v| / |v|
    double rayleigh = 0.0;       // q
    double q2 = 0.0;             // Q2(lambda)
    double q2_transposed = 0.0;  // Q2(lambda^T)
    double exact = 0.0;          // exact spectrum formula at lambda
    double exact_transposed = 0.0;
    std::string q2_label;        // "lambda", "transpose", "both" or "none"
    std::string exact_label;
};

EigenvectorCheck verify_eigenvector(const Partition& lambda, double alpha, const SparseOperator& I2, const FockBasis& b,
                                    int N, const PhysParams& params, const JackEmbedding& e, double label_tol = 1e-8);

struct JackCalibration {
    double alpha = 1.0;
    std::string alpha_map;  // "lh2/lt2" or "lt2/lh2"
    double sign = 1.0;
    double fit_residual = 0.0;         // levels <= fit_level
    double validation_residual = 0.0;  // levels fit_level+1 .. validate_level, no refit
    std::vector<EigenvectorCheck> checks;
};

// Candidates are tried in the order (lh2/lt2, +), (lh2/lt2, -), (lt2/lh2, +),
// (lt2/lh2, -); the first candidate with worst residual <= 1e-10 is kept,
// otherwise the one with the smallest worst residual.
JackCalibration calibrate_jack(int N, const PhysParams& params, int fit_level = 3, int validate_level = 5);

}  // namespace calolab
