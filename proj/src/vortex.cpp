#include "calolab/vortex.hpp"

#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

namespace calolab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

struct Field {
    const VortexSet* set;

    void operator()(const State& y, State& dydt, double /*t*/) const
    {
        const auto& v = set->vortices;
        const int K = static_cast<int>(v.size());
        const double w = set->background_omega;
        for (int i = 0; i < K; ++i) {
            double u = -w * y[2 * i + 1], vy = w * y[2 * i];
            for (int j = 0; j < K; ++j) {
                if (j == i) continue;
                const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
                const double r2 = dx * dx + dy * dy;
                if (r2 <= set->min_distance * set->min_distance)
                    throw NumericalError(NumericalError::Kind::collision, "vortices collided");
                const double k = v[j].gamma / (2.0 * std::numbers::pi * r2);
                u -= k * dy;
                vy += k * dx;
            }
            dydt[2 * i] = u;
            dydt[2 * i + 1] = vy;
        }
    }
};

State pack(const VortexSet& s)
{
    State y(2 * s.vortices.size());
    for (std::size_t i = 0; i < s.vortices.size(); ++i) {
        y[2 * i] = s.vortices[i].x;
        y[2 * i + 1] = s.vortices[i].y;
    }
    return y;
}

}  // namespace

std::vector<double> vortex_velocity(const VortexSet& s)
{
    State y = pack(s), dy(y.size());
    Field{&s}(y, dy, 0.0);
    return dy;
}

VortexInvariants vortex_invariants(const VortexSet& s)
{
    VortexInvariants inv;
    const auto& v = s.vortices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        inv.impulse_x += v[i].gamma * v[i].x;
        inv.impulse_y += v[i].gamma * v[i].y;
        inv.angular += v[i].gamma * (v[i].x * v[i].x + v[i].y * v[i].y);
        for (std::size_t j = 0; j < v.size(); ++j)
            if (j != i)
                inv.energy -= v[i].gamma * v[j].gamma * std::log(std::hypot(v[i].x - v[j].x, v[i].y - v[j].y)) /
                              (4.0 * std::numbers::pi);
    }
    return inv;
}

VortexSet kirchhoff_step(const VortexSet& s, double dt, double tol)
{
    if (s.vortices.empty()) throw ValidationError("empty vortex set");
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    for (std::size_t i = 0; i < s.vortices.size(); ++i)
        for (std::size_t j = i + 1; j < s.vortices.size(); ++j)
            if (std::hypot(s.vortices[i].x - s.vortices[j].x, s.vortices[i].y - s.vortices[j].y) <= s.min_distance)
                throw NumericalError(NumericalError::Kind::collision, "vortices coincide");
    VortexSet out = s;
    if (dt == 0.0) return out;
    State y = pack(s);
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_adaptive(stepper, Field{&s}, y, 0.0, dt, dt / 16.0);
    } catch (const odeint::step_adjustment_error& e) {
        throw NumericalError(NumericalError::Kind::collision, std::string("vortex step collapsed: ") + e.what());
    }
    for (std::size_t i = 0; i < out.vortices.size(); ++i) {
        out.vortices[i].x = y[2 * i];
        out.vortices[i].y = y[2 * i + 1];
    }
    return out;
}

void check_placement(VortexSet& s)
{
    if (s.droplet_radius <= 0.0) return;
    for (std::size_t i = 0; i < s.vortices.size(); ++i)
        if (std::hypot(s.vortices[i].x, s.vortices[i].y) > 0.7 * s.droplet_radius)
            s.warnings.push_back("vortex " + std::to_string(i) + " lies beyond 0.7 droplet radii");
}

VortexSet random_vortices(int K, NoiseStream& rng, double radius, double min_distance)
{
    if (K < 1) throw ValidationError("need at least one vortex");
    VortexSet s;
    for (int attempt = 0; static_cast<int>(s.vortices.size()) < K; ++attempt) {
        if (attempt > 100000) throw ValidationError("could not place vortices with the requested spacing");
        const double r = radius * std::sqrt(rng.uniform()), phi = 2.0 * std::numbers::pi * rng.uniform();
        Vortex v{r * std::cos(phi), r * std::sin(phi), 0.5 + rng.uniform()};
        bool ok = true;
        for (const auto& o : s.vortices) ok = ok && std::hypot(o.x - v.x, o.y - v.y) > min_distance;
        if (ok) s.vortices.push_back(v);
    }
    return s;
}

}  // namespace calolab
