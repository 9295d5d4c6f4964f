#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "calolab/core.hpp"

namespace calolab {

// Weakly decreasing positive parts.
using Partition = std::vector<int>;

int weight(const Partition& p);
Partition transpose(const Partition& p);
std::string partition_label(const Partition& p);  // "(2,1)", "()" for the vacuum
// All partitions of n, in reverse lexicographic order: (n), (n-1,1), ...
std::vector<Partition> partitions_of(int n);

struct FockBasis {
    int Lambda = 0;
    std::vector<Partition> states;  // graded by level, reverse lexicographic inside a level
    std::vector<int> level_begin;   // size Lambda + 2
    std::map<Partition, int> index;

    int dim() const { return static_cast<int>(states.size()); }
    int level_size(int level) const { return level_begin[level + 1] - level_begin[level]; }
    int find(const Partition& p) const;  // -1 when absent
};

FockBasis enumerate_basis(int Lambda);

using SparseMat = Eigen::SparseMatrix<double>;

struct SparseOperator {
    std::string name;
    SparseMat mat;
    int shift = 0;  // level change applied by the operator
    std::map<std::string, double> calibration;

    Eigen::MatrixXd block(const FockBasis& b, int level) const;  // level -> level + shift
};

enum class ModeKind { raise, lower };

// alpha_n^dagger adds a part n, alpha_n removes one; [alpha_n, alpha_n^dagger] = scale * n * l_hbar^2.
// scale = 2 reproduces the main-text convention.
SparseOperator mode_operator(const FockBasis& b, int n, ModeKind kind, const PhysParams& params, double scale = 1.0);

SparseOperator build_I1(const FockBasis& b, int N, const PhysParams& params, double scale = 1.0);

// I2(C) = l_t sum (a+_{m+n} a_m a_n + h.c.) - (l_t^2 + C2 l_h^2) sum n a+_n a_n
//         + (N l_t^2 + C3 l_h^2) sum a+_n a_n + C4 l_h^4.
// The defaults give the operator with coefficients (l_h^2 - l_t^2) and N l_t^2.
struct I2Calibration {
    double c2 = -1.0;
    double c3 = 0.0;
    double c4 = 0.0;
};

SparseOperator build_I2(const FockBasis& b, int N, const PhysParams& params, const I2Calibration& C = {});

// Level-one energy label l_h^2 |lambda| + (N+1)(l_t^2 N + l_h^2).
double q1_prediction(const Partition& p, int N, const PhysParams& params);
// Variant weighting part i by i.
double q1_weighted_variant(const Partition& p, int N, const PhysParams& params);
// l_t^2 sum_i [(N + (l_h^2/l_t^2)(1 - 2i)) lambda_i - lambda_i^2].
double q2_prediction(const Partition& p, int N, const PhysParams& params);
// Exact spectrum of build_I2 with default constants:
// l_h^2 [l_t^2 sum_i (N + 1 - 2i) lambda_i + l_h^2 sum_i lambda_i^2].
double i2_exact_eigenvalue(const Partition& p, int N, const PhysParams& params);

struct SpectrumRow {
    int level = 0;
    Partition partition;
    double eigenvalue = 0.0;
    double predicted = 0.0;
    double residual = 0.0;
    bool degenerate = false;  // predicted value shared with another partition of the level
};

struct SpectrumReport {
    std::vector<SpectrumRow> rows;
    double max_residual = 0.0;
    int degeneracies = 0;
    std::map<std::string, double> constants;

    std::string csv() const;
};

using Predictor = std::function<double(const Partition&)>;

// Diagonalizes the level block and pairs sorted eigenvalues with sorted
// predictions.  Sorted pairing minimizes every symmetric residual norm, so a
// nonzero residual is a genuine spectral mismatch; individual labels inside a
// degenerate cluster are not identified here.
SpectrumReport diagonalize_and_match(const SparseOperator& op, const FockBasis& b, int level, const Predictor& predict,
                                     double degeneracy_tol = 1e-9);
SpectrumReport diagonalize_and_match(const SparseOperator& op, const FockBasis& b, int min_level, int max_level,
                                     const Predictor& predict, double degeneracy_tol = 1e-9);

struct I2Fit {
    I2Calibration constants;
    double fit_residual = 0.0;         // max over fit levels
    double validation_residual = 0.0;  // max over validation levels, no refit
    SpectrumReport report;             // all levels up to validate_level
};

// Brent search over C2 with a linear least-squares solve for C3, C4 at each
// trial, fitted on levels <= fit_level.
I2Fit calibrate_I2(int N, const PhysParams& params, const Predictor& target, int fit_level = 4, int validate_level = 6);

// Virasoro generators in unit modes b_n = alpha_n / l_h.
struct VirasoroSystem {
    FockBasis basis;
    double beta = 0.0;
    std::vector<SparseMat> lower, raise;  // index n = 1..Lambda

    SparseMat mode(int n) const;  // b_n for n > 0, b_{-n}^dagger for n < 0
    SparseMat L(int n) const;     // shifts the level by -n
    SparseMat L0() const;
};

// Linear coefficient (l_h/l_t - l_t/l_h)/sqrt(2) of the generators in unit modes.
double virasoro_beta(const PhysParams& params);
double central_charge_prediction(const PhysParams& params);  // 1 - 12 beta^2

VirasoroSystem make_virasoro(int Lambda, const PhysParams& params);

struct VirasoroDefect {
    int m = 0, n = 0;
    int trusted_level = 0;
    double defect_norm = 0.0;      // max entry of [L_m, L_n] - (m-n) L_{m+n} - central term
    double central_term = 0.0;     // m + n = 0 only
    double c_measured = NAN;       // m + n = 0, |m| >= 2
};

VirasoroDefect virasoro_defect(const VirasoroSystem& v, int m, int n);

}  // namespace calolab
