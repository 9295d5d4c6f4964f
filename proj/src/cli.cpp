#include "calolab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "calolab/acceptance.hpp"
#include "calolab/calogero.hpp"
#include "calolab/fock.hpp"
#include "calolab/jack.hpp"
#include "calolab/langevin.hpp"
#include "calolab/matrix_model.hpp"
#include "calolab/phase_hydro.hpp"
#include "calolab/report.hpp"
#include "calolab/vortex.hpp"

namespace calolab {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> config_keys = {"m", "omega", "theta", "hbar", "seed", "workers", "out", "wallclock"};

struct Globals {
    std::string config;
    std::uint64_t seed = 1;
    std::string out = "calolab-out";
    int workers = 1;
    double m = NAN, omega = NAN, theta = NAN, hbar = NAN;
    bool wallclock = false;
};

// Everything a command produces; written only after the command succeeded.
struct Output {
    std::vector<RunRecord> records;
    std::map<std::string, std::string> files;
    std::string summary;
    int code = 0;
};

struct Context {
    PhysParams params;       // normalized to m Omega = 1
    PhysParams raw;          // as given
    std::uint64_t seed = 1;
    int workers = 1;
    bool wallclock = false;
    std::string out;
    std::string command;

    RunRecord record(const std::string& started) const
    {
        RunRecord r;
        r.seed = seed;
        r.params = raw;
        r.command = command;
        r.run_id = make_run_id(seed, raw, command);
        r.started_at = started;
        return r;
    }
    std::string now() const { return timestamp_now(!wallclock); }
};

void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

std::string num(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

Context resolve(const Globals& g, const CLI::App& app, const std::string& command)
{
    std::map<std::string, std::string> cfg;
    std::string path = g.config;
    if (path.empty())
        if (const char* env = std::getenv("CALOLAB_CONFIG")) path = env;
    if (!path.empty()) cfg = load_config_file(path);
    for (const auto& [k, v] : cfg)
        if (!config_keys.count(k)) throw ValidationError("unknown config key: " + k);

    Context c;
    c.raw = params_from_config(cfg);
    if (!std::isnan(g.m)) c.raw.m = g.m;
    if (!std::isnan(g.omega)) c.raw.omega = g.omega;
    if (!std::isnan(g.theta)) c.raw.theta = g.theta;
    if (!std::isnan(g.hbar)) c.raw.hbar = g.hbar;
    c.raw.validate();
    c.params = normalize_units(c.raw);

    c.seed = cfg.count("seed") ? static_cast<std::uint64_t>(config_number(cfg, "seed", 1)) : 1;
    c.workers = static_cast<int>(config_number(cfg, "workers", 1));
    c.out = cfg.count("out") ? cfg.at("out") : g.out;
    c.wallclock = cfg.count("wallclock") ? config_number(cfg, "wallclock", 0) != 0.0 : false;
    if (app.count("--seed")) c.seed = g.seed;
    if (app.count("--workers")) c.workers = g.workers;
    if (app.count("--out")) c.out = g.out;
    if (app.count("--wallclock")) c.wallclock = g.wallclock;
    require(c.workers >= 1 && c.workers <= 256, "workers must be in [1, 256]");
    require(!c.out.empty(), "output directory must not be empty");
    c.command = command;
    return c;
}

void write_output(const Output& o, const std::string& dir, const std::string& stem)
{
    fs::create_directories(dir);
    for (const auto& [name, content] : o.files) write_file_atomic((fs::path(dir) / name).string(), content);
    if (!o.records.empty()) {
        const std::string path = (fs::path(dir) / (stem + ".jsonl")).string();
        fs::remove(path);
        emit_report(o.records, path);
    }
}

// ---- matrix ----

Output matrix_evolve(const Context& c, int N, double t_final, int samples)
{
    require(N >= 2 && N <= 64, "n must be in [2, 64]");
    require(t_final > 0.0, "t must be positive");
    require(samples >= 2, "samples must be >= 2");
    const std::string start = c.now();
    NoiseStream rng = spawn_noise_stream(c.seed, 1);
    const ParticleState s0 = random_admissible_state(N, rng, c.params);
    const ComplexMatrixState z0 = embed_diagonal_gauge(s0.x, s0.p, c.params).state;
    std::vector<std::string> header = {"t"};
    for (int i = 0; i < N; ++i) header.push_back("x" + std::to_string(i));
    header.push_back("constraint_residual");
    CsvTable t(header);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double tk = t_final * k / (samples - 1);
        const ComplexMatrixState z = evolve_exact(z0, tk);
        Eigen::SelfAdjointEigenSolver<Mat> es(z.X(), Eigen::EigenvaluesOnly);
        std::vector<std::string> row = {fmt_num(tk)};
        for (int i = 0; i < N; ++i) row.push_back(fmt_num(es.eigenvalues()(i) / std::sqrt(c.raw.m * c.raw.omega)));
        const double r = max_abs(constraint_residual(z));
        worst = std::max(worst, r);
        row.push_back(fmt_num(r));
        t.add_row(row);
    }
    Output o;
    RunRecord rec = c.record(start);
    rec.add("n", N);
    rec.add("max_constraint_residual", worst);
    rec.finished_at = c.now();
    o.records.push_back(rec);
    o.files["matrix_evolve.csv"] = t.str();
    o.summary = "max constraint residual " + num(worst);
    return o;
}

Output matrix_invariants(const Context& c, int N)
{
    require(N >= 2 && N <= 64, "n must be in [2, 64]");
    const std::string start = c.now();
    NoiseStream rng = spawn_noise_stream(c.seed, 1);
    const ParticleState s0 = random_admissible_state(N, rng, c.params);
    const ComplexMatrixState z = embed_diagonal_gauge(s0.x, s0.p, c.params).state;
    CsvTable t({"n", "invariant", "generator_re", "generator_im"});
    RunRecord rec = c.record(start);
    for (int n = 1; n <= N; ++n) {
        const double I = classical_invariant(z, n);
        const cplx B = spectrum_generator(z, n);
        t.add_row({std::to_string(n), fmt_num(I), fmt_num(B.real()), fmt_num(B.imag())});
        rec.add("I" + std::to_string(n), I);
    }
    rec.add("hamiltonian", hamiltonian(s0));
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["matrix_invariants.csv"] = t.str();
    o.summary = "I1 = " + num(classical_invariant(z, 1)) + ", H = " + num(hamiltonian(s0));
    return o;
}

Output matrix_check(const Context& c, int n_max)
{
    require(n_max >= 2 && n_max <= 64, "n must be in [2, 64]");
    const std::string start = c.now();
    CsvTable t({"n", "constraint_residual", "gauge_residual"});
    RunRecord rec = c.record(start);
    double worst = 0.0;
    for (int N = 2; N <= n_max; ++N) {
        const ComplexMatrixState a = build_annihilation(N, c.params);
        const double cr = max_abs(constraint_residual(a)), gr = max_abs(gauge_residual(a));
        worst = std::max({worst, cr, gr});
        t.add_row({std::to_string(N), fmt_num(cr), fmt_num(gr)});
    }
    rec.add("max_residual", worst);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["matrix_constraints.csv"] = t.str();
    o.summary = "max residual " + num(worst);
    return o;
}

// ---- calogero ----

Output calogero_simulate(const Context& c, int N, double t_final, int samples, double tol)
{
    require(N >= 2 && N <= 64, "n must be in [2, 64]");
    require(t_final > 0.0, "t must be positive");
    require(samples >= 2, "samples must be >= 2");
    require(tol > 0.0 && tol < 1e-2, "tol must be in (0, 1e-2)");
    const std::string start = c.now();
    NoiseStream rng = spawn_noise_stream(c.seed, 1);
    const ParticleState s0 = random_admissible_state(N, rng, c.params);
    const Trajectory tr = integrate(s0, t_final, tol, samples);
    std::vector<std::string> header = {"t"};
    for (int i = 0; i < N; ++i) header.push_back("x" + std::to_string(i));
    for (int i = 0; i < N; ++i) header.push_back("p" + std::to_string(i));
    CsvTable t(header);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        std::vector<std::string> row = {fmt_num(tr.t[k])};
        for (double x : tr.states[k].x) row.push_back(fmt_num(x));
        for (double p : tr.states[k].p) row.push_back(fmt_num(p));
        t.add_row(row);
    }
    RunRecord rec = c.record(start);
    rec.add("energy", hamiltonian(s0));
    rec.add("max_energy_drift", tr.max_energy_drift);
    rec.add("steps", double(tr.steps));
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["calogero_trajectory.csv"] = t.str();
    o.summary = "relative energy drift " + num(tr.max_energy_drift);
    return o;
}

// ---- hydro ----

Output hydro_droplet(const Context& c, int N, int grid)
{
    require(N >= 2 && N <= 200, "n must be in [2, 200]");
    require(grid >= 16 && grid <= 2048, "grid must be in [16, 2048]");
    const std::string start = c.now();
    const DropletReport d = droplet_density(N, c.params, droplet_grid(N, c.params, grid), c.workers);
    RunRecord rec = c.record(start);
    rec.add("trace", d.trace);
    rec.add("plateau", d.plateau);
    rec.add("edge_radius", d.edge_radius);
    rec.add("expected_radius", d.expected_radius);
    rec.add("tail_ratio", d.tail_ratio);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["droplet_density.csv"] = d.density.to_csv();
    o.summary = "trace " + num(d.trace) + ", edge " + num(d.edge_radius) + " (expected " + num(d.expected_radius) + ")";
    return o;
}

Output hydro_circulation(const Context& c, int N, int mode, double eps, int grid)
{
    require(N >= 2 && N <= 200, "n must be in [2, 200]");
    require(mode >= 0 && mode < N, "mode must be in [0, n)");
    require(eps > 0.0 && eps < 0.1, "eps must be in (0, 0.1)");
    require(grid >= 16 && grid <= 2048, "grid must be in [16, 2048]");
    const std::string start = c.now();
    const double R = std::sqrt(2.0 * N) * c.params.ell_theta();
    const DeformationSeries V = single_mode(mode, eps, N, c.params, eps);
    const CirculationReport r = circulation_check(V, c.params, droplet_grid(N, c.params, grid), 0.3 * R, 0.0, 0.3 * R);
    RunRecord rec = c.record(start);
    rec.add("circulation", r.circulation);
    rec.add("enclosed_vorticity", r.enclosed_vorticity);
    rec.add("relative_error", r.relative_error);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.summary = "circulation " + num(r.circulation) + ", enclosed vorticity " + num(r.enclosed_vorticity) +
                ", relative error " + num(r.relative_error);
    if (!r.budget_ok) {
        o.summary += " (deformation exceeds the linear budget)";
        o.code = 2;
    }
    return o;
}

Output hydro_vortices(const Context& c, int K, int steps, double dt)
{
    require(K >= 1 && K <= 100, "k must be in [1, 100]");
    require(steps >= 1, "steps must be >= 1");
    require(dt > 0.0, "dt must be positive");
    const std::string start = c.now();
    NoiseStream rng = spawn_noise_stream(c.seed, 1);
    VortexSet s = random_vortices(K, rng, 1.0, 0.3);
    const VortexInvariants i0 = vortex_invariants(s);
    std::vector<std::string> header = {"t"};
    for (int k = 0; k < K; ++k) {
        header.push_back("x" + std::to_string(k));
        header.push_back("y" + std::to_string(k));
    }
    header.push_back("energy");
    CsvTable t(header);
    double drift = 0.0;
    for (int step = 0; step <= steps; ++step) {
        if (step > 0) s = kirchhoff_step(s, dt);
        const VortexInvariants i = vortex_invariants(s);
        drift = std::max(drift, std::abs(i.energy - i0.energy) / std::max(std::abs(i0.energy), 1e-3));
        std::vector<std::string> row = {fmt_num(step * dt)};
        for (const auto& v : s.vortices) {
            row.push_back(fmt_num(v.x));
            row.push_back(fmt_num(v.y));
        }
        row.push_back(fmt_num(i.energy));
        t.add_row(row);
    }
    RunRecord rec = c.record(start);
    rec.add("energy", i0.energy);
    rec.add("max_energy_drift", drift);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["vortices.csv"] = t.str();
    o.summary = "energy drift " + num(drift);
    return o;
}

// ---- fock ----

Output fock_spectrum(const Context& c, const std::string& op, int level, int N)
{
    require(op == "i1" || op == "i2", "op must be i1 or i2");
    require(level >= 0 && level <= 10, "level must be in [0, 10]");
    require(N >= 1, "n must be >= 1");
    const std::string start = c.now();
    const FockBasis b = enumerate_basis(level);
    const PhysParams& p = c.params;
    const SparseOperator H = op == "i1" ? build_I1(b, N, p) : build_I2(b, N, p);
    const Predictor predict = op == "i1" ? Predictor([&](const Partition& l) { return q1_prediction(l, N, p); })
                                         : Predictor([&](const Partition& l) { return i2_exact_eigenvalue(l, N, p); });
    const SpectrumReport rep = diagonalize_and_match(H, b, 0, level, predict);
    CsvTable t({"level", "partition", "eigenvalue", "predicted", "residual", "degenerate", "q2"});
    for (const auto& r : rep.rows)
        t.add_row({std::to_string(r.level), partition_label(r.partition), fmt_num(r.eigenvalue), fmt_num(r.predicted),
                   fmt_num(r.residual), r.degenerate ? "1" : "0", fmt_num(q2_prediction(r.partition, N, p))});
    RunRecord rec = c.record(start);
    rec.add("max_residual", rep.max_residual);
    rec.add("degeneracies", rep.degeneracies);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["fock_spectrum_" + op + ".csv"] = t.str();
    o.summary = op + " levels 0.." + std::to_string(level) + ": max residual " + num(rep.max_residual);
    return o;
}

Output fock_virasoro(const Context& c, int m, int n, int Lambda, double ratio)
{
    require(Lambda >= 1 && Lambda <= 16, "lambda must be in [1, 16]");
    require(m != 0 && n != 0 && std::abs(m) <= Lambda && std::abs(n) <= Lambda, "m, n must be nonzero and within lambda");
    PhysParams p = c.params;
    if (!std::isnan(ratio)) {
        require(ratio > 0.0, "ratio must be positive");
        p.hbar = p.theta / (ratio * ratio);
    }
    const std::string start = c.now();
    const VirasoroSystem v = make_virasoro(Lambda, p);
    const VirasoroDefect d = virasoro_defect(v, m, n);
    RunRecord rec = c.record(start);
    rec.add("beta", v.beta);
    rec.add("defect_norm", d.defect_norm);
    rec.add("trusted_level", d.trusted_level);
    rec.add("central_charge_predicted", central_charge_prediction(p));
    if (!std::isnan(d.c_measured)) rec.add("central_charge", d.c_measured);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.summary = "[L" + std::to_string(m) + ", L" + std::to_string(n) + "] defect " + num(d.defect_norm);
    if (!std::isnan(d.c_measured))
        o.summary += ", c = " + num(d.c_measured) + " (predicted " + num(central_charge_prediction(p)) + ")";
    return o;
}

// ---- jack ----

Output jack_verify(const Context& c, int level, int N)
{
    require(level >= 1 && level <= 7, "level must be in [1, 7]");
    require(N >= 1, "n must be >= 1");
    const std::string start = c.now();
    const JackCalibration cal = calibrate_jack(N, c.params, std::min(3, level), level);
    CsvTable t({"partition", "residual", "rayleigh", "exact", "exact_label", "q2", "q2_label"});
    for (const auto& k : cal.checks)
        t.add_row({partition_label(k.lambda), fmt_num(k.residual), fmt_num(k.rayleigh), fmt_num(k.exact), k.exact_label,
                   fmt_num(k.q2), k.q2_label});
    RunRecord rec = c.record(start);
    rec.add("alpha", cal.alpha);
    rec.add("sign", cal.sign);
    rec.add("fit_residual", cal.fit_residual);
    rec.add("validation_residual", cal.validation_residual);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["jack_eigenvectors.csv"] = t.str();
    o.summary = "alpha = " + num(cal.alpha) + " (" + cal.alpha_map + "), max residual " +
                num(std::max(cal.fit_residual, cal.validation_residual));
    return o;
}

// ---- langevin ----

Output langevin_modes_cmd(const Context& c, ModeConfig cfg, double tau_max)
{
    cfg.seed = c.seed;
    cfg.workers = c.workers;
    if (!std::isnan(tau_max)) {
        require(tau_max > cfg.burn_in, "tau-max must exceed the burn-in");
        cfg.samples = std::max(1, static_cast<int>(std::floor((tau_max - cfg.burn_in) / cfg.stride)));
    }
    require(cfg.trajectories >= 2, "trajectories must be >= 2");
    require(cfg.n_max >= 1 && cfg.n_max <= 16, "n-max must be in [1, 16]");
    cfg.validate(c.params);
    const std::string start = c.now();
    const ModeEnsemble e = mode_simulate(cfg, c.params);
    CsvTable t({"n", "conj_cov", "conj_se", "conj_oracle", "holo_cov", "holo_se", "holo_oracle", "decay_rate"});
    RunRecord rec = c.record(start);
    for (const auto& st : e.modes) {
        const LyapunovOracle orc = lyapunov_oracle(cfg.lattice, st.n, c.params, cfg.dtau);
        t.add_row({std::to_string(st.n), fmt_num(st.conj_cov.mean), fmt_num(st.conj_cov.se), fmt_num(orc.conj_site(true)),
                   fmt_num(st.holo_cov.mean), fmt_num(st.holo_cov.se), fmt_num(orc.holo_lag(0, true).real()),
                   fmt_num(st.decay_rate)});
        rec.add("conj_cov_" + std::to_string(st.n), st.conj_cov.mean);
        if (!std::isnan(st.decay_rate)) rec.add("decay_rate_" + std::to_string(st.n), st.decay_rate);
    }
    rec.add("cross_23", e.cross_23.mean);
    rec.add("cross_23_se", e.cross_23.se);
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["langevin_modes.csv"] = t.str();
    o.summary = std::to_string(e.modes.size()) + " modes, " + std::to_string(e.steps) + " steps per trajectory";
    return o;
}

Output langevin_matrix_cmd(const Context& c, int N, MatrixConfig cfg)
{
    require(N >= 2 && N <= 8, "n must be in [2, 8]");
    require(cfg.steps >= 1, "steps must be >= 1");
    require(cfg.dtau > 0.0, "dtau must be positive");
    cfg.seed = c.seed;
    cfg.record_every = std::max(1, cfg.steps / 1000);
    const std::string start = c.now();
    const MatrixFieldState run = matrix_simulate(N, c.params, cfg);
    CsvTable t({"step", "constraint", "gauge", "multiplier_norm", "dtau", "corrected"});
    for (const auto& h : run.history)
        t.add_row({std::to_string(h.step), fmt_num(h.constraint), fmt_num(h.gauge), fmt_num(h.multiplier_norm),
                   fmt_num(h.dtau), h.corrected ? "1" : "0"});
    RunRecord rec = c.record(start);
    rec.add("max_constraint", run.max_constraint);
    rec.add("max_gauge", run.max_gauge);
    rec.add("rejected", run.rejected);
    rec.add("corrections", run.corrections);
    for (std::size_t k = 0; k < run.modes.size(); ++k) rec.add("mode_abs_" + std::to_string(k + 1), std::abs(run.modes[k]));
    rec.finished_at = c.now();
    Output o;
    o.records.push_back(rec);
    o.files["langevin_matrix.csv"] = t.str();
    o.summary = "max constraint " + num(run.max_constraint) + ", max gauge " + num(run.max_gauge);
    return o;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Calogero matrix model laboratory", "calolab"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "flat key = value config file (default: $CALOLAB_CONFIG)");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--workers", g.workers, "worker threads");
    app.add_option("--m", g.m, "particle mass");
    app.add_option("--omega", g.omega, "trap frequency");
    app.add_option("--theta", g.theta, "noncommutativity");
    app.add_option("--hbar", g.hbar, "Planck constant");
    app.add_flag("--wallclock", g.wallclock, "record real timestamps instead of pinned ones");

    // Each leaf binds a function producing the command output; it runs after parsing.
    std::function<Output(const Context&)> action;
    std::string command, stem;
    auto leaf = [&](CLI::App* sub, std::string name, std::string file, std::function<Output(const Context&)> f) {
        sub->callback([&, name, file, f] {
            command = name;
            stem = file;
            action = f;
        });
    };

    auto* matrix = app.add_subcommand("matrix", "matrix model")->require_subcommand(1);
    int mn = 4, msamples = 50;
    double mt = 2.0 * std::numbers::pi;
    auto* mev = matrix->add_subcommand("evolve", "exact evolution of a random on-shell state");
    mev->add_option("--n", mn, "matrix size");
    mev->add_option("--t", mt, "final time");
    mev->add_option("--samples", msamples, "output times");
    leaf(mev, "matrix evolve", "matrix_evolve", [&](const Context& c) { return matrix_evolve(c, mn, mt, msamples); });
    auto* minv = matrix->add_subcommand("invariants", "invariants and spectrum generators");
    minv->add_option("--n", mn, "matrix size");
    leaf(minv, "matrix invariants", "matrix_invariants", [&](const Context& c) { return matrix_invariants(c, mn); });
    auto* mchk = matrix->add_subcommand("check-constraints", "constraint residuals of the ground state");
    mchk->add_option("--n", mn, "largest matrix size");
    leaf(mchk, "matrix check-constraints", "matrix_constraints", [&](const Context& c) { return matrix_check(c, mn); });

    auto* calo = app.add_subcommand("calogero", "particle dynamics")->require_subcommand(1);
    int cn = 3, csamples = 100;
    double ct = 2.0 * std::numbers::pi, ctol = 1e-10;
    auto* csim = calo->add_subcommand("simulate", "integrate a random admissible state");
    csim->add_option("--n", cn, "particles");
    csim->add_option("--t", ct, "final time");
    csim->add_option("--samples", csamples, "output times");
    csim->add_option("--tol", ctol, "integrator tolerance");
    leaf(csim, "calogero simulate", "calogero_simulate",
         [&](const Context& c) { return calogero_simulate(c, cn, ct, csamples, ctol); });

    auto* hydro = app.add_subcommand("hydro", "phase-space hydrodynamics")->require_subcommand(1);
    int hn = 30, hgrid = 256, hmode = 2, hk = 4, hsteps = 1000;
    double heps = 1e-3, hdt = 0.01;
    auto* hdrop = hydro->add_subcommand("droplet", "ground-state phase-space density");
    hdrop->add_option("--n", hn, "particles");
    hdrop->add_option("--grid", hgrid, "grid points per axis");
    leaf(hdrop, "hydro droplet", "hydro_droplet", [&](const Context& c) { return hydro_droplet(c, hn, hgrid); });
    auto* hcirc = hydro->add_subcommand("circulation", "circulation around a loop for a single deformation mode");
    hcirc->add_option("--n", hn, "particles");
    hcirc->add_option("--mode", hmode, "exponent of the deformation w^mode");
    hcirc->add_option("--eps", heps, "deformation amplitude");
    hcirc->add_option("--grid", hgrid, "grid points per axis");
    leaf(hcirc, "hydro circulation", "hydro_circulation",
         [&](const Context& c) { return hydro_circulation(c, hn, hmode, heps, hgrid); });
    auto* hvort = hydro->add_subcommand("vortices", "point-vortex dynamics");
    hvort->add_option("--k", hk, "vortices");
    hvort->add_option("--steps", hsteps, "steps");
    hvort->add_option("--dt", hdt, "step");
    leaf(hvort, "hydro vortices", "hydro_vortices", [&](const Context& c) { return hydro_vortices(c, hk, hsteps, hdt); });

    auto* fock = app.add_subcommand("fock", "collective-field operators")->require_subcommand(1);
    std::string fop = "i1";
    int flevel = 6, fn = 10, vm = 2, vn = -2, vlambda = 12;
    double vratio = NAN;
    auto* fspec = fock->add_subcommand("spectrum", "spectrum of an invariant operator");
    fspec->add_option("--op", fop, "i1 or i2");
    fspec->add_option("--level", flevel, "highest level");
    fspec->add_option("--n", fn, "particles");
    leaf(fspec, "fock spectrum", "fock_spectrum", [&](const Context& c) { return fock_spectrum(c, fop, flevel, fn); });
    auto* fvir = fock->add_subcommand("virasoro", "commutator of two generators");
    fvir->add_option("--m", vm, "first index");
    fvir->add_option("--n", vn, "second index");
    fvir->add_option("--lambda", vlambda, "level cutoff");
    fvir->add_option("--ratio", vratio, "l_theta / l_hbar (overrides hbar)");
    leaf(fvir, "fock virasoro", "fock_virasoro", [&](const Context& c) { return fock_virasoro(c, vm, vn, vlambda, vratio); });

    auto* jack = app.add_subcommand("jack", "Jack polynomials")->require_subcommand(1);
    int jlevel = 5, jn = 10;
    auto* jver = jack->add_subcommand("verify", "Jack states as eigenvectors of the cubic operator");
    jver->add_option("--level", jlevel, "highest level");
    jver->add_option("--n", jn, "particles");
    leaf(jver, "jack verify", "jack_verify", [&](const Context& c) { return jack_verify(c, jlevel, jn); });

    auto* lang = app.add_subcommand("langevin", "stochastic quantization")->require_subcommand(1);
    ModeConfig mcfg;
    mcfg.lattice.M = 64;
    double tau_max = NAN;
    auto* lmodes = lang->add_subcommand("modes", "free collective modes on a periodic lattice");
    lmodes->add_option("--n-max", mcfg.n_max, "highest mode");
    lmodes->add_option("--lattice", mcfg.lattice.M, "lattice sites");
    lmodes->add_option("--dt", mcfg.lattice.dt, "lattice spacing");
    lmodes->add_option("--dtau", mcfg.dtau, "Langevin step");
    lmodes->add_option("--trajectories", mcfg.trajectories, "independent trajectories");
    lmodes->add_option("--tau-max", tau_max, "Langevin time per trajectory");
    leaf(lmodes, "langevin modes", "langevin_modes", [&](const Context& c) { return langevin_modes_cmd(c, mcfg, tau_max); });
    MatrixConfig xcfg;
    int xn = 4;
    auto* lmat = lang->add_subcommand("matrix", "constrained matrix Langevin");
    lmat->add_option("--n", xn, "matrix size");
    lmat->add_option("--steps", xcfg.steps, "steps");
    lmat->add_option("--dtau", xcfg.dtau, "Langevin step");
    leaf(lmat, "langevin matrix", "langevin_matrix", [&](const Context& c) { return langevin_matrix_cmd(c, xn, xcfg); });

    bool quick = false;
    std::vector<int> skip;
    auto* vall = app.add_subcommand("verify-all", "run the acceptance criteria");
    vall->add_flag("--quick", quick, "reduced sample sizes");
    vall->add_option("--skip", skip, "criterion ids to skip")->delimiter(',');

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (vall->parsed()) {
            const Context c = resolve(g, app, "verify-all");
            for (int id : skip) require(id >= 1 && id <= 13, "criterion ids are 1..13");
            AcceptanceOptions opt;
            opt.quick = quick;
            opt.seed = c.seed;
            opt.workers = c.workers;
            opt.skip.insert(skip.begin(), skip.end());
            opt.on_result = [&](const CriterionResult& r) { out << format_result(r) << "\n" << std::flush; };
            const auto results = run_acceptance(opt);
            write_acceptance_artifacts(results, c.out, c.seed, quick);
            const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
            return ok ? 0 : 2;
        }
        const Context c = resolve(g, app, command);
        const Output o = action(c);
        write_output(o, c.out, stem);
        out << command << ": " << o.summary << "\n";
        return o.code;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace calolab
