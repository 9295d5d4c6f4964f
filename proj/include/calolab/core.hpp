#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace calolab {

using cplx = std::complex<double>;

// Bad input or configuration; maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure (singular system, collision, divergence); exit code 2.
class NumericalError : public std::runtime_error {
public:
    enum class Kind { singular, collision, non_convergence, instability, truncation };
    NumericalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct PhysParams {
    double m = 1.0;
    double omega = 1.0;
    double theta = 1.0;
    double hbar = 1.0;

    double ell_theta() const;
    double ell_hbar() const;
    double ell_theta2() const { return theta / (m * omega); }
    double ell_hbar2() const { return hbar / (m * omega); }
    void validate() const;
    bool normalized(double tol = 1e-14) const;
};

// Rescales the mass unit so that m*Omega = 1.  Omega is unchanged; theta and
// hbar pick up the same factor, so ell_theta and ell_hbar are invariant.
PhysParams normalize_units(const PhysParams& params);

struct NumericConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iterations = 100;
    int grid = 256;
    int truncation = 8;

    void validate() const;
};

// Counter-based Philox4x32-10 generator.  The whole state is (key, counter),
// so a stream is a cheap value and any position can be reached directly.
class NoiseStream {
public:
    NoiseStream() = default;
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id);

    // Complex Gaussian with unit-variance real and imaginary parts.
    cplx complex_normal();
    double normal();
    double uniform();  // in (0, 1)

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t position() const { return counter_; }
    void seek(std::uint64_t counter) { counter_ = counter; have_spare_ = false; }

private:
    std::array<std::uint32_t, 4> block();

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

NoiseStream spawn_noise_stream(std::uint64_t seed, std::uint64_t stream_id);

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

struct Observable {
    std::string name;
    double value = 0.0;
};

struct RunRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    PhysParams params;
    std::string command;
    std::vector<Observable> observables;
    std::string started_at;
    std::string finished_at;

    void add(const std::string& name, double value) { observables.push_back({name, value}); }
    std::string to_json_line() const;
};

// Deterministic id derived from (seed, params, command).
std::string make_run_id(std::uint64_t seed, const PhysParams& params, const std::string& command);

// ISO-8601 UTC.  When SOURCE_DATE_EPOCH is set, or pinned is true, the clock is
// replaced by that epoch (0 if unset) so artifacts can be byte-compared.
std::string timestamp_now(bool pinned = false);

// Flat "key = value" file; '#' starts a comment.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config_file(const std::string& path);

PhysParams params_from_config(const std::map<std::string, std::string>& cfg);
double config_number(const std::map<std::string, std::string>& cfg, const std::string& key, double fallback);

// Runs body(i) for i in [0, count) on up to `workers` threads.  Each index is
// processed exactly once; callers store results per index and reduce in order.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

// Sum in a fixed pairwise tree so the result does not depend on scheduling.
double pairwise_sum(const double* x, std::size_t n);
cplx pairwise_sum(const cplx* x, std::size_t n);

}  // namespace calolab
