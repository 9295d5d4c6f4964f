#include "calolab/calogero.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace calolab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

void check_distinct(const std::vector<double>& x, double min_gap)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (std::abs(x[i] - x[j]) <= min_gap)
                throw NumericalError(NumericalError::Kind::collision, "particles collided or coincide");
}

struct System {
    int N;
    PhysParams par;
    TrapForce trap;
    double min_gap;

    void operator()(const State& y, State& dydt, double /*t*/) const
    {
        const double m = par.m;
        const double g = 2.0 * par.theta * par.theta / m;
        for (int i = 0; i < N; ++i) {
            dydt[i] = y[N + i] / m;
            double f = trap == TrapForce::included ? -m * par.omega * par.omega * y[i] : 0.0;
            for (int j = 0; j < N; ++j) {
                if (j == i) continue;
                const double d = y[i] - y[j];
                if (std::abs(d) <= min_gap)
                    throw NumericalError(NumericalError::Kind::collision, "particles approached within the collision guard");
                f += g / (d * d * d);
            }
            dydt[N + i] = f;
        }
    }
};

ParticleState unpack(const State& y, int N, const PhysParams& par)
{
    ParticleState s;
    s.x.assign(y.begin(), y.begin() + N);
    s.p.assign(y.begin() + N, y.end());
    s.params = par;
    return s;
}

}  // namespace

double ParticleState::min_gap() const
{
    double g = INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) g = std::min(g, std::abs(x[i] - x[j]));
    return g;
}

Derivative rhs(const ParticleState& s, TrapForce trap)
{
    s.params.validate();
    check_distinct(s.x, 0.0);
    const int N = s.N();
    State y(2 * N), dy(2 * N);
    std::copy(s.x.begin(), s.x.end(), y.begin());
    std::copy(s.p.begin(), s.p.end(), y.begin() + N);
    System{N, s.params, trap, 0.0}(y, dy, 0.0);
    return {State(dy.begin(), dy.begin() + N), State(dy.begin() + N, dy.end())};
}

double hamiltonian(const ParticleState& s, PairSum pairs)
{
    s.params.validate();
    check_distinct(s.x, 0.0);
    const double m = s.params.m, w = s.params.omega, th = s.params.theta;
    double h = 0.0;
    for (int i = 0; i < s.N(); ++i) h += s.p[i] * s.p[i] / (2.0 * m) + 0.5 * m * w * w * s.x[i] * s.x[i];
    double pair = 0.0;
    for (int i = 0; i < s.N(); ++i)
        for (int j = i + 1; j < s.N(); ++j) {
            const double d = s.x[i] - s.x[j];
            pair += th * th / (m * d * d);
        }
    return h + (pairs == PairSum::ordered ? 2.0 : 1.0) * pair;
}

Trajectory integrate_at(const ParticleState& s0, const std::vector<double>& times, double tol, TrapForce trap,
                        double min_gap)
{
    s0.params.validate();
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (s0.p.size() != s0.x.size() || s0.x.empty()) throw ValidationError("state has mismatched or empty arrays");
    check_distinct(s0.x, min_gap);
    if (times.empty() || times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
        throw ValidationError("sample times must be ascending and non-negative");

    const int N = s0.N();
    State y(2 * N);
    std::copy(s0.x.begin(), s0.x.end(), y.begin());
    std::copy(s0.p.begin(), s0.p.end(), y.begin() + N);

    Trajectory traj;
    const double h0 = hamiltonian(s0);
    const double hscale = std::max(std::abs(h0), 1e-300);
    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s0.x[a] < s0.x[b]; });

    std::vector<double> ts = times;
    if (ts.front() > 0.0) ts.insert(ts.begin(), 0.0);
    const bool dropped_origin = ts.size() != times.size();

    auto observer = [&](const State& state, double t) {
        ParticleState s = unpack(state, N, s0.params);
        for (int k = 1; k < N; ++k)
            if (!(s.x[order[k - 1]] < s.x[order[k]]))
                throw NumericalError(NumericalError::Kind::collision, "particle ordering changed along the trajectory");
        traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(hamiltonian(s) - h0) / hscale);
        traj.t.push_back(t);
        traj.states.push_back(std::move(s));
    };

    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
    const double span = ts.back() - ts.front();
    const double dt0 = std::max(span, 1.0) * 1e-3;
    try {
        traj.steps = static_cast<long>(odeint::integrate_times(stepper, System{N, s0.params, trap, min_gap}, y, ts.begin(),
                                                               ts.end(), dt0, observer, odeint::max_step_checker(2000000)));
    } catch (const odeint::step_adjustment_error& e) {
        throw NumericalError(NumericalError::Kind::collision, std::string("step size underflow: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw NumericalError(NumericalError::Kind::collision, std::string("integrator made no progress: ") + e.what());
    }
    if (dropped_origin) {
        traj.t.erase(traj.t.begin());
        traj.states.erase(traj.states.begin());
    }
    return traj;
}

Trajectory integrate(const ParticleState& s0, double t_final, double tol, int samples, TrapForce trap)
{
    if (!(t_final > 0.0)) throw ValidationError("t_final must be positive");
    samples = std::max(samples, 2);
    std::vector<double> times(samples);
    for (int k = 0; k < samples; ++k) times[k] = t_final * k / (samples - 1);
    return integrate_at(s0, times, tol, trap);
}

ParticleState random_admissible_state(int N, NoiseStream& rng, const PhysParams& params, double spread, double min_gap)
{
    if (N < 1) throw ValidationError("N must be >= 1");
    ParticleState s;
    s.params = params;
    const double ell = params.ell_theta();
    // Increasing positions: cumulative positive gaps.
    s.x.resize(N);
    double pos = 0.0;
    for (int i = 0; i < N; ++i) {
        if (i) pos += ell * (min_gap + spread * rng.uniform());
        s.x[i] = pos;
    }
    double mean = 0.0;
    for (double v : s.x) mean += v;
    mean /= N;
    for (double& v : s.x) v -= mean;
    const double pscale = std::sqrt(params.m * params.omega) * std::sqrt(params.theta);
    s.p.resize(N);
    double pm = 0.0;
    for (int i = 0; i < N; ++i) {
        s.p[i] = pscale * rng.normal();
        pm += s.p[i];
    }
    pm /= N;
    for (double& v : s.p) v -= pm;
    if (N == 1) s.x[0] = 0.0;
    return s;
}

double equilibrium_separation(const PhysParams& params)
{
    params.validate();
    // m Omega^2 d / 2 = 2 theta^2 / (m d^3)  =>  d^4 = 4 theta^2 / (m^2 Omega^2)
    return std::pow(4.0 * params.theta * params.theta / (params.m * params.m * params.omega * params.omega), 0.25);
}

}  // namespace calolab
