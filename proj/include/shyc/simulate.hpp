#pragma once

// Run configuration, path-parallel Monte Carlo driver and trajectory output.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "couplings.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "spaces.hpp"

namespace shyc {

inline constexpr std::uint64_t kBuiltinSeed = 20240601;
inline constexpr const char* kSeedEnv = "SHYC_SEED";

// Seed used when none is given: $SHYC_SEED if set, else a fixed constant.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv(kSeedEnv); env && *env) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(std::string(kSeedEnv) + " is not an unsigned integer");
        return v;
    }
    return kBuiltinSeed;
}

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

inline double parse_double(std::string_view s, const std::string& key) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError(key + ": '" + std::string(s) + "' is not a number");
    return v;
}

template <class Int>
Int parse_int(std::string_view s, const std::string& key) {
    Int v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError(key + ": '" + std::string(s) + "' is not an integer");
    return v;
}

inline SpaceSpec parse_space(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("space must look like sphere:2, euclidean:3 or hyperbolic:2");
    const std::string kind = text.substr(0, colon);
    const int d = parse_int<int>(std::string_view(text).substr(colon + 1), "space");
    int r = 0;
    if (kind == "sphere") r = 1;
    else if (kind == "euclidean" || kind == "flat") r = 0;
    else if (kind == "hyperbolic") r = -1;
    else throw ConfigError("unknown space kind '" + kind + "'");
    try {
        return {r, d};
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

inline std::string render_vec(const Vec& v) {
    std::string out;
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

inline Vec parse_vec(const std::string& text, const std::string& key) {
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) xs.push_back(parse_double(item, key));
    if (xs.empty() || static_cast<int>(xs.size()) > kMaxDim) throw ConfigError(key + ": bad coordinate list");
    return Vec(std::span<const double>(xs));
}

struct SimConfig {
    SpaceSpec space = SpaceSpec::sphere(2);
    StrategySpec strategy;
    double rho0 = 1.0;
    std::optional<Vec> x0;  // explicit start coordinates override rho0
    std::optional<Vec> y0;
    double h = 1e-3;
    double T = 1.0;
    long n_paths = 100;
    std::uint64_t seed = default_seed();
    int threads = 0;  // 0: all cores
    int record_every = 1;
    std::string csv_path;
    std::string json_path;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;

    [[nodiscard]] long n_steps() const { return std::lround(T / h); }
};

// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// Overlay key/value settings onto `base`.
inline SimConfig apply_settings(SimConfig c, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "space") c.space = parse_space(value);
        else if (key == "strategy") c.strategy.id = value;
        else if (key == "k") c.strategy.k = parse_double(value, key);
        else if (key == "alpha-override") c.strategy.alpha_override = value.empty() ? std::nullopt : std::optional(parse_double(value, key));
        else if (key == "eps") c.strategy.eps = value.empty() ? std::nullopt : std::optional(parse_double(value, key));
        else if (key == "rho0") c.rho0 = parse_double(value, key);
        else if (key == "x0") c.x0 = value.empty() ? std::nullopt : std::optional(parse_vec(value, key));
        else if (key == "y0") c.y0 = value.empty() ? std::nullopt : std::optional(parse_vec(value, key));
        else if (key == "h") c.h = parse_double(value, key);
        else if (key == "T") c.T = parse_double(value, key);
        else if (key == "paths") c.n_paths = parse_int<long>(value, key);
        else if (key == "seed") c.seed = parse_int<std::uint64_t>(value, key);
        else if (key == "threads") c.threads = parse_int<int>(value, key);
        else if (key == "record-every") c.record_every = parse_int<int>(value, key);
        else if (key == "csv") c.csv_path = value;
        else if (key == "json") c.json_path = value;
        else throw ConfigError("unknown setting '" + key + "'");
    }
    return c;
}

inline SimConfig parse_config(const std::string& text) { return apply_settings(SimConfig{}, parse_key_values(text)); }

inline std::string render_config(const SimConfig& c) {
    std::ostringstream o;
    const char* kind = c.space.curvature > 0 ? "sphere" : c.space.curvature < 0 ? "hyperbolic" : "euclidean";
    o << "space = " << kind << ':' << c.space.dim << '\n';
    o << "strategy = " << c.strategy.id << '\n';
    o << "k = " << format_double(c.strategy.k) << '\n';
    o << "alpha-override = " << (c.strategy.alpha_override ? format_double(*c.strategy.alpha_override) : "") << '\n';
    o << "eps = " << (c.strategy.eps ? format_double(*c.strategy.eps) : "") << '\n';
    o << "rho0 = " << format_double(c.rho0) << '\n';
    o << "x0 = " << (c.x0 ? render_vec(*c.x0) : "") << '\n';
    o << "y0 = " << (c.y0 ? render_vec(*c.y0) : "") << '\n';
    o << "h = " << format_double(c.h) << '\n';
    o << "T = " << format_double(c.T) << '\n';
    o << "paths = " << c.n_paths << '\n';
    o << "seed = " << c.seed << '\n';
    o << "threads = " << c.threads << '\n';
    o << "record-every = " << c.record_every << '\n';
    o << "csv = " << c.csv_path << '\n';
    o << "json = " << c.json_path << '\n';
    return o.str();
}

inline PointPair start_pair(const SimConfig& c) {
    if (c.x0.has_value() != c.y0.has_value()) throw ConfigError("x0 and y0 must be given together");
    if (c.x0) return {*c.x0, *c.y0};
    return canonical_pair(c.space, c.rho0);
}

// Structural checks; strategy preconditions are checked by construction.
inline void validate(const SimConfig& c) {
    if (c.n_paths < 1) throw ConfigError("paths must be at least 1");
    if (!(c.h > 0.0) || !std::isfinite(c.h)) throw ConfigError("h must be positive");
    if (!(c.T > 0.0) || !std::isfinite(c.T)) throw ConfigError("T must be positive");
    if (c.h > c.T) throw ConfigError("h exceeds T");
    if (c.n_steps() > 1'000'000'000L) throw ConfigError("too many steps");
    if (c.threads < 0) throw ConfigError("threads must be >= 0");
    if (c.record_every < 1) throw ConfigError("record-every must be >= 1");
    if (!c.x0 && (!(c.rho0 >= 0.0) || (c.space.curvature > 0 && c.rho0 > std::numbers::pi)))
        throw ConfigError("rho0 out of range for " + c.space.name());
    try {
        const auto pair = start_pair(c);
        require_point(c.space, pair.x, "x0");
        require_point(c.space, pair.y, "y0");
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

// Build the strategy, mapping input-domain failures to configuration errors.
// Rate infeasibility propagates unchanged.
inline std::unique_ptr<Strategy> build_strategy(const SimConfig& c) {
    try {
        return make_strategy(c.space, c.strategy);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Parallel execution

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Calls fn(i) for i in [0, n) on a pool of workers. The first exception is
// rethrown after all workers stop.
template <class Fn>
void parallel_for(long n, int threads, Fn&& fn) {
    const int workers = static_cast<int>(std::min<long>(resolve_threads(threads), std::max(1L, n)));
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (long i = next++; i < n && !failed; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

// Evaluate fn(i) for every path and return the results in path order.
template <class Fn>
auto parallel_map(long n, int threads, Fn&& fn) {
    using R = decltype(fn(0L));
    std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](long i) { slots[static_cast<std::size_t>(i)].emplace(fn(i)); });
    std::vector<R> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------
// Single paths

inline StepNoise draw_noise(NoiseStream& rng, int dim) {
    StepNoise n;
    n.primary = rng.normals(dim);
    n.auxiliary = rng.normals(dim);
    return n;
}

// Advance `st` by n_steps steps; observer(step_index, state) is called at
// step 0 and after every step. Times are set to i * h to avoid drift.
template <class Observer>
void simulate_path(const Strategy& strategy, CouplingState& st, double h, long n_steps, NoiseStream& rng,
                   Observer&& observer) {
    const double t0 = st.t;
    observer(0L, static_cast<const CouplingState&>(st));
    const int dim = strategy.noise_dim();
    for (long i = 1; i <= n_steps; ++i) {
        const auto noise = draw_noise(rng, dim);
        strategy.step(st, noise, h);
        st.t = t0 + static_cast<double>(i) * h;
        if (observer(i, static_cast<const CouplingState&>(st)) == false) break;
    }
}

struct TrajectoryRecord {
    std::uint64_t path_id = 0;
    std::uint64_t seed = 0;
    std::vector<double> t;
    std::vector<double> rho;
    std::vector<Regime> regime;

    [[nodiscard]] double min_rho() const { return rho.empty() ? 0.0 : *std::min_element(rho.begin(), rho.end()); }
    [[nodiscard]] double max_rho() const { return rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end()); }
};

inline std::vector<TrajectoryRecord> run_simulation(const SimConfig& c) {
    validate(c);
    const auto strategy = build_strategy(c);
    const auto pair = start_pair(c);
    const CouplingState initial = strategy->start(pair.x, pair.y);
    const long steps = c.n_steps();
    return parallel_map(c.n_paths, c.threads, [&](long path) {
        TrajectoryRecord rec;
        rec.path_id = static_cast<std::uint64_t>(path);
        rec.seed = c.seed;
        NoiseStream rng(c.seed, rec.path_id);
        CouplingState st = initial;
        simulate_path(*strategy, st, c.h, steps, rng, [&](long i, const CouplingState& s) {
            if (i % c.record_every == 0 || i == steps) {
                rec.t.push_back(s.t);
                rec.rho.push_back(strategy->distance(s));
                rec.regime.push_back(s.regime);
            }
            return true;
        });
        return rec;
    });
}

inline void write_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
    out << "t,rho,regime,path_id\n";
    for (const auto& r : records)
        for (std::size_t i = 0; i < r.t.size(); ++i)
            out << format_double(r.t[i]) << ',' << format_double(r.rho[i]) << ',' << regime_name(r.regime[i]) << ','
                << r.path_id << '\n';
}

}  // namespace shyc
