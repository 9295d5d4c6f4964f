#pragma once

#include <vector>

#include "calolab/core.hpp"

namespace calolab {

struct ParticleState {
    std::vector<double> x;
    std::vector<double> p;
    PhysParams params;

    int N() const { return static_cast<int>(x.size()); }
    double min_gap() const;
};

enum class TrapForce { included, omitted };

// Pair energy summed over i<j (conserved by rhs) or over ordered pairs i != j,
// which double counts and is kept only as a diagnostic.
enum class PairSum { distinct, ordered };

struct Derivative {
    std::vector<double> dx, dp;
};

Derivative rhs(const ParticleState& s, TrapForce trap = TrapForce::included);
double hamiltonian(const ParticleState& s, PairSum pairs = PairSum::distinct);

struct Trajectory {
    std::vector<double> t;
    std::vector<ParticleState> states;
    double max_energy_drift = 0.0;  // relative to |H(0)|
    long steps = 0;
};

// Adaptive Dormand-Prince 5(4) with dense output; samples at `times`
// (ascending, starting at or after 0).  Throws NumericalError(collision) when
// two particles approach closer than `min_gap` or the step size collapses.
Trajectory integrate_at(const ParticleState& s0, const std::vector<double>& times, double tol,
                        TrapForce trap = TrapForce::included, double min_gap = 1e-8);
Trajectory integrate(const ParticleState& s0, double t_final, double tol, int samples = 2,
                     TrapForce trap = TrapForce::included);

// Sorted positions with minimum spacing, zero center of mass and zero total momentum.
ParticleState random_admissible_state(int N, NoiseStream& rng, const PhysParams& params, double spread = 1.5,
                                      double min_gap = 0.3);

// Separation of the static two-particle configuration.
double equilibrium_separation(const PhysParams& params);

}  // namespace calolab
