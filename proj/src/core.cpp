#include "calolab/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace calolab {

double PhysParams::ell_theta() const { return std::sqrt(theta / (m * omega)); }
double PhysParams::ell_hbar() const { return std::sqrt(hbar / (m * omega)); }

void PhysParams::validate() const
{
    if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("mass must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("omega must be positive");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ValidationError("theta must be positive");
    if (!(hbar >= 0.0) || !std::isfinite(hbar)) throw ValidationError("hbar must be non-negative");
}

bool PhysParams::normalized(double tol) const { return std::abs(m * omega - 1.0) <= tol; }

PhysParams normalize_units(const PhysParams& params)
{
    params.validate();
    const double k = params.m * params.omega;
    if (k == 1.0) return params;
    PhysParams out = params;
    out.m = 1.0 / params.omega;
    out.theta = params.theta / k;
    out.hbar = params.hbar / k;
    return out;
}

void NumericConfig::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ValidationError("tolerances must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (grid < 1 || truncation < 1) throw ValidationError("grid and truncation sizes must be >= 1");
}

// ---- Philox4x32-10 ----

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

std::array<std::uint32_t, 4> NoiseStream::block()
{
    const std::array<std::uint32_t, 4> ctr = {std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
                                              std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
    ++counter_;
    return philox4x32(ctr, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
}

namespace {
// 53-bit uniform strictly inside (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
    return (double(bits) + 0.5) * 0x1.0p-53;
}
}  // namespace

double NoiseStream::uniform()
{
    const auto b = block();
    return to_open_unit(b[0], b[1]);
}

cplx NoiseStream::complex_normal()
{
    const auto b = block();
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

double NoiseStream::normal()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const cplx z = complex_normal();
    spare_ = z.imag();
    have_spare_ = true;
    return z.real();
}

NoiseStream spawn_noise_stream(std::uint64_t seed, std::uint64_t stream_id) { return NoiseStream(seed, stream_id); }

// ---- run records ----

namespace {
std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string exact_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string make_run_id(std::uint64_t seed, const PhysParams& p, const std::string& command)
{
    std::ostringstream key;
    key << seed << '|' << exact_number(p.m) << '|' << exact_number(p.omega) << '|' << exact_number(p.theta) << '|'
        << exact_number(p.hbar) << '|' << command;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key.str())));
    return buf;
}

std::string RunRecord::to_json_line() const
{
    nlohmann::ordered_json j;
    j["run_id"] = run_id;
    j["seed"] = seed;
    j["params"] = {{"m", params.m}, {"omega", params.omega}, {"theta", params.theta}, {"hbar", params.hbar}};
    j["command"] = command;
    auto obs = nlohmann::ordered_json::array();
    for (const auto& o : observables) {
        nlohmann::ordered_json e;
        e["name"] = o.name;
        if (std::isfinite(o.value))
            e["value"] = o.value;
        else
            e["value"] = nullptr;
        obs.push_back(e);
    }
    j["observables"] = obs;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j.dump();
}

std::string timestamp_now(bool pinned)
{
    std::time_t t;
    const char* sde = std::getenv("SOURCE_DATE_EPOCH");
    if (sde && *sde)
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    else if (pinned)
        t = 0;
    else
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- config ----

namespace {
std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in)
{
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    return parse_config(in);
}

double config_number(const std::map<std::string, std::string>& cfg, const std::string& key, double fallback)
{
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &used);
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "' is not a number: " + it->second);
    }
    if (used != it->second.size()) throw ValidationError("config key '" + key + "' is not a number: " + it->second);
    return v;
}

PhysParams params_from_config(const std::map<std::string, std::string>& cfg)
{
    PhysParams p;
    p.m = config_number(cfg, "m", p.m);
    p.omega = config_number(cfg, "omega", p.omega);
    p.theta = config_number(cfg, "theta", p.theta);
    p.hbar = config_number(cfg, "hbar", p.hbar);
    p.validate();
    return p;
}

// ---- parallel helpers ----

void parallel_for(int count, int workers, const std::function<void(int)>& body)
{
    if (count <= 0) return;
    workers = std::clamp(workers, 1, count);
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {
template <class T>
T pairwise(const T* x, std::size_t n)
{
    if (n == 0) return T{};
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise(x, h) + pairwise(x + h, n - h);
}
}  // namespace

double pairwise_sum(const double* x, std::size_t n) { return pairwise(x, n); }
cplx pairwise_sum(const cplx* x, std::size_t n) { return pairwise(x, n); }

}  // namespace calolab
