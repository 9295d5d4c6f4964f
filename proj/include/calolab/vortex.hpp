#pragma once

#include <string>
#include <vector>

#include "calolab/core.hpp"

namespace calolab {

struct Vortex {
    double x = 0.0;
    double y = 0.0;
    double gamma = 1.0;
};

struct VortexSet {
    std::vector<Vortex> vortices;
    double background_omega = 0.0;  // uniform rotation u = omega z x r
    double droplet_radius = 0.0;    // 0 disables the placement warning
    double min_distance = 1e-6;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(vortices.size()); }
};

struct VortexInvariants {
    double energy = 0.0;      // -(1/4 pi) sum_{i != j} G_i G_j ln r_ij
    double impulse_x = 0.0;   // sum G_i x_i
    double impulse_y = 0.0;
    double angular = 0.0;     // sum G_i |r_i|^2
};

// Velocity of each vortex induced by all others plus the background rotation.
std::vector<double> vortex_velocity(const VortexSet& s);

VortexInvariants vortex_invariants(const VortexSet& s);

// Adaptive Dormand-Prince step over dt (negative dt integrates backwards).
// Throws NumericalError(collision) if two vortices come closer than min_distance.
VortexSet kirchhoff_step(const VortexSet& s, double dt, double tol = 1e-12);

// Appends warnings for vortices placed beyond 0.7 of the droplet radius.
void check_placement(VortexSet& s);

VortexSet random_vortices(int K, NoiseStream& rng, double radius, double min_distance = 0.2);

}  // namespace calolab
