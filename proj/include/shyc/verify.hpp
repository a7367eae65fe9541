#pragma once

// Closed-form distance laws with an ODE oracle, Monte Carlo checks of
// distance laws and marginals, the drift identity and the gradient maximum
// principle demo on a spherical cap.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "couplings.hpp"
#include "drivers.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "spaces.hpp"

namespace shyc {

// ---------------------------------------------------------------------------
// Statistics

struct RunningStats {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    [[nodiscard]] double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    [[nodiscard]] double stderr_mean() const noexcept { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

inline double z_score(const RunningStats& s, double expected) {
    const double se = s.stderr_mean();
    const double diff = s.mean - expected;
    if (se == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return diff / se;
}

// Least-squares slope of log(err) against log(h).
inline double convergence_order_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw DomainError("order fit needs at least three ladder points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [h, e] : points) {
        if (!(h > 0.0) || !(e > 0.0)) throw DomainError("order fit needs positive step sizes and errors");
        const double lx = std::log(h), ly = std::log(e);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(points.size());
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw DomainError("order fit needs distinct step sizes");
    return (n * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
    std::string strategy;
    std::string law;
    long n_paths = 0;
    std::vector<double> h_ladder;
    std::vector<double> sup_err;
    std::optional<double> fitted_order;
    std::vector<double> z_scores;
    bool pass = false;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();

    [[nodiscard]] nlohmann::ordered_json to_json() const {
        auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
        nlohmann::ordered_json j;
        j["strategy"] = strategy;
        j["law"] = law;
        j["n_paths"] = n_paths;
        j["h_ladder"] = h_ladder;
        j["sup_err"] = nlohmann::ordered_json::array();
        for (double e : sup_err) j["sup_err"].push_back(finite_or_null(e));
        j["fitted_order"] = fitted_order ? finite_or_null(*fitted_order) : nlohmann::ordered_json();
        j["z_scores"] = nlohmann::ordered_json::array();
        for (double z : z_scores) j["z_scores"].push_back(finite_or_null(z));
        j["pass"] = pass;
        if (!details.empty()) j["details"] = details;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Distance laws

enum class LawId { Synchronous, Perverse, Exponential, Constant, ExtrinsicContract, ExtrinsicExpand };

struct DistanceLaw {
    LawId id = LawId::Constant;
    int r = 1;
    int d = 2;
    double k = 0.0;
    double rho0 = 1.0;

    // The extrinsic laws are stated for the chord |X - Y| in R^3.
    [[nodiscard]] bool chordal() const noexcept { return id == LawId::ExtrinsicContract || id == LawId::ExtrinsicExpand; }

    [[nodiscard]] std::string name() const {
        switch (id) {
            case LawId::Synchronous: return "synchronous";
            case LawId::Perverse: return "perverse";
            case LawId::Exponential: return "exponential";
            case LawId::Constant: return "constant";
            case LawId::ExtrinsicContract: return "extrinsic-contract-chord";
            case LawId::ExtrinsicExpand: return "extrinsic-expand-chord";
        }
        return "?";
    }

    [[nodiscard]] double initial() const {
        if (id == LawId::ExtrinsicContract || id == LawId::ExtrinsicExpand) return 2.0 * std::sin(rho0 / 2);
        return rho0;
    }
};

inline double law_eval(const DistanceLaw& law, double t) {
    const double dm1 = law.d - 1;
    const double half = law.rho0 / 2;
    switch (law.id) {
        case LawId::Synchronous:
            if (law.r > 0) return 2.0 * std::asin(std::exp(-dm1 * t / 2) * std::sin(half));
            if (law.r < 0) return 2.0 * std::asinh(std::exp(dm1 * t / 2) * std::sinh(half));
            return law.rho0;
        case LawId::Perverse:
            if (law.r > 0) return 2.0 * std::acos(std::exp(-dm1 * t / 2) * std::cos(half));
            if (law.r < 0) return 2.0 * std::acosh(std::exp(dm1 * t / 2) * std::cosh(half));
            return std::sqrt(law.rho0 * law.rho0 + 4.0 * dm1 * t);
        case LawId::Exponential: return law.rho0 * std::exp(-law.k * t / 2);
        case LawId::Constant: return law.rho0;
        case LawId::ExtrinsicContract: return law.initial() * std::exp(-t / 2);
        case LawId::ExtrinsicExpand: {
            const double s = 2.0 * std::cos(half);
            return std::sqrt(4.0 - s * s * std::exp(-t));
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Right-hand side of the deterministic ODE each law solves, in the law's
// own variable (rho, or the chord for the extrinsic laws).
inline double law_drift(const DistanceLaw& law, double v) {
    switch (law.id) {
        case LawId::Synchronous: return rotation_drift(SpaceSpec(law.r, law.d), 0.0, v);
        case LawId::Perverse: return rotation_drift(SpaceSpec(law.r, law.d), std::numbers::pi, v);
        case LawId::Exponential: return -law.k * v / 2;
        case LawId::Constant: return 0.0;
        case LawId::ExtrinsicContract: return -v / 2;
        case LawId::ExtrinsicExpand: return (4.0 - v * v) / (2.0 * v);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Classical RK4 on the defining ODE from the law's initial value.
inline double law_ode_oracle(const DistanceLaw& law, double t, int steps = 20000) {
    double v = law.initial();
    if (t == 0.0) return v;
    const double dt = t / steps;
    for (int i = 0; i < steps; ++i) {
        const double k1 = law_drift(law, v);
        const double k2 = law_drift(law, v + 0.5 * dt * k1);
        const double k3 = law_drift(law, v + 0.5 * dt * k2);
        const double k4 = law_drift(law, v + dt * k3);
        v += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return v;
}

inline double law_observe(const DistanceLaw& law, const SpaceSpec& s, const CouplingState& st) {
    return law.chordal() ? chordal_distance(st.x, st.y) : distance(s, st.x, st.y);
}

// ---------------------------------------------------------------------------
// Distance-law check over a step-size ladder

inline constexpr double kRoundoffFloor = 1e-12;

struct LawCheckConfig {
    SpaceSpec space = SpaceSpec::sphere(2);
    StrategySpec strategy;
    DistanceLaw law;
    double T = 1.0;
    std::vector<double> h_ladder{4e-3, 2e-3, 1e-3, 5e-4};
    long n_paths = 200;
    std::uint64_t seed = kBuiltinSeed;
    int threads = 0;
    double tolerance = 0.02;
    double min_order = 0.4;
};

inline Report distance_law_check(const LawCheckConfig& c) {
    if (c.law.r != c.space.curvature || c.law.d != c.space.dim)
        throw DomainError("law " + c.law.name() + " does not describe " + c.space.name());
    if (c.law.chordal() && c.space != SpaceSpec::sphere(2)) throw DomainError("chordal laws live on sphere:2");
    if (c.h_ladder.empty() || c.n_paths < 1) throw DomainError("empty ladder or no paths");
    const auto strategy = make_strategy(c.space, c.strategy);
    const auto pair = canonical_pair(c.space, c.law.rho0);
    const CouplingState initial = strategy->start(pair.x, pair.y);

    Report rep;
    rep.strategy = strategy->id();
    rep.law = c.law.name();
    rep.n_paths = c.n_paths;
    rep.h_ladder = c.h_ladder;
    nlohmann::ordered_json per_h = nlohmann::ordered_json::array();
    for (double h : c.h_ladder) {
        const long steps = std::lround(c.T / h);
        // per path: |rho - law| at every grid time
        const auto errs = parallel_map(c.n_paths, c.threads, [&](long path) {
            NoiseStream rng(c.seed, static_cast<std::uint64_t>(path));
            CouplingState st = initial;
            std::vector<double> e(static_cast<std::size_t>(steps) + 1, 0.0);
            simulate_path(*strategy, st, h, steps, rng, [&](long i, const CouplingState& s) {
                e[static_cast<std::size_t>(i)] = std::abs(law_observe(c.law, c.space, s) - law_eval(c.law, s.t));
                return true;
            });
            return e;
        });
        RunningStats per_path_sup;
        double worst = 0.0;
        std::vector<double> mean_at(static_cast<std::size_t>(steps) + 1, 0.0);
        for (const auto& e : errs) {
            const double sup = *std::max_element(e.begin(), e.end());
            per_path_sup.add(sup);
            worst = std::max(worst, sup);
            for (std::size_t i = 0; i < e.size(); ++i) mean_at[i] += e[i];
        }
        // sup over time of the path-averaged absolute error
        const double sup_mean = *std::max_element(mean_at.begin(), mean_at.end()) / static_cast<double>(errs.size());
        rep.sup_err.push_back(sup_mean);
        per_h.push_back({{"h", h},
                         {"sup_mean_err", sup_mean},
                         {"mean_sup_err", per_path_sup.mean},
                         {"se", per_path_sup.stderr_mean()},
                         {"max_sup_err", worst}});
    }
    rep.details["per_h"] = per_h;
    rep.details["tolerance"] = c.tolerance;
    rep.details["min_order"] = c.min_order;
    // An exact invariant leaves only round-off, which has no h-order to fit.
    const bool exact = std::all_of(rep.sup_err.begin(), rep.sup_err.end(), [](double e) { return e < kRoundoffFloor; });
    rep.details["exact_invariant"] = exact;
    if (exact) {
        rep.pass = true;
    } else {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < c.h_ladder.size(); ++i) pts.emplace_back(c.h_ladder[i], rep.sup_err[i]);
        if (pts.size() >= 3) rep.fitted_order = convergence_order_fit(pts);
        const std::size_t finest = static_cast<std::size_t>(
            std::min_element(c.h_ladder.begin(), c.h_ladder.end()) - c.h_ladder.begin());
        rep.pass = rep.sup_err[finest] < c.tolerance && rep.fitted_order && *rep.fitted_order >= c.min_order;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Marginals: E[v . X_t] = exp(-r d t / 2) (v . x0) for any linear functional
// of the ambient coordinates (first eigenfunctions on the sphere and the
// hyperboloid; harmonic in flat space).

enum class Coordinate { X, Y };

struct MarginalConfig {
    long n_paths = 10000;
    double h = 1e-3;
    std::vector<double> times{0.25, 0.5, 1.0};
    std::vector<Vec> functionals;  // empty: x0 direction and a fixed oblique one
    std::uint64_t seed = kBuiltinSeed;
    int threads = 0;
    double z_limit = 3.0;
};

inline double marginal_expectation(const SpaceSpec& s, const Vec& v, const SpacePoint& p0, double t) {
    return std::exp(-s.curvature * s.dim * t / 2.0) * v.dot(p0);
}

inline std::vector<Vec> default_functionals(const SpaceSpec& s, const SpacePoint& x0, const SpacePoint& y0) {
    const int n = s.ambient_dim();
    Vec oblique(n);
    for (int i = 0; i < n; ++i) oblique[i] = 1.0 + 0.5 * i;
    oblique = oblique.normalized();
    Vec axis = (x0 + y0);
    axis = axis.norm() > 1e-9 ? axis.normalized() : Vec::basis(n, 0);
    return {axis, oblique};
}

// Returns the X report and the Y report of one simulation.
inline std::pair<Report, Report> marginal_check(const Strategy& strategy, const PointPair& start, const MarginalConfig& c) {
    const auto& s = strategy.space();
    const CouplingState initial = strategy.start(start.x, start.y);
    const auto fs = c.functionals.empty() ? default_functionals(s, start.x, start.y) : c.functionals;
    std::vector<long> checkpoints;
    for (double t : c.times) checkpoints.push_back(std::lround(t / c.h));
    const long steps = *std::max_element(checkpoints.begin(), checkpoints.end());
    const std::size_t slots = checkpoints.size() * fs.size();

    // per path: [coordinate][checkpoint * functional]
    const auto samples = parallel_map(c.n_paths, c.threads, [&](long path) {
        NoiseStream rng(c.seed, static_cast<std::uint64_t>(path));
        CouplingState st = initial;
        std::vector<double> out(2 * slots);
        simulate_path(strategy, st, c.h, steps, rng, [&](long i, const CouplingState& cs) {
            for (std::size_t k = 0; k < checkpoints.size(); ++k)
                if (checkpoints[k] == i)
                    for (std::size_t f = 0; f < fs.size(); ++f) {
                        out[k * fs.size() + f] = fs[f].dot(cs.x);
                        out[slots + k * fs.size() + f] = fs[f].dot(cs.y);
                    }
            return true;
        });
        return out;
    });

    auto build = [&](Coordinate coord) {
        Report rep;
        rep.strategy = strategy.id();
        rep.law = coord == Coordinate::X ? "marginal-X" : "marginal-Y";
        rep.n_paths = c.n_paths;
        rep.h_ladder = {c.h};
        const SpacePoint& p0 = coord == Coordinate::X ? start.x : start.y;
        const std::size_t base = coord == Coordinate::X ? 0 : slots;
        double worst = 0.0;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < checkpoints.size(); ++k)
            for (std::size_t f = 0; f < fs.size(); ++f) {
                RunningStats st;
                for (const auto& row : samples) st.add(row[base + k * fs.size() + f]);
                const double t = static_cast<double>(checkpoints[k]) * c.h;
                const double expected = marginal_expectation(s, fs[f], p0, t);
                const double z = z_score(st, expected);
                rep.z_scores.push_back(z);
                worst = std::max(worst, std::abs(z));
                rows.push_back({{"t", t}, {"functional", f}, {"mean", st.mean}, {"expected", expected}, {"se", st.stderr_mean()}, {"z", z}});
            }
        rep.details["rows"] = rows;
        rep.details["max_abs_z"] = worst;
        rep.pass = worst < c.z_limit;
        return rep;
    };
    return {build(Coordinate::X), build(Coordinate::Y)};
}

inline Report marginal_check(const Strategy& strategy, Coordinate coord, const PointPair& start, const MarginalConfig& c) {
    auto both = marginal_check(strategy, start, c);
    return coord == Coordinate::X ? both.first : both.second;
}

// ---------------------------------------------------------------------------
// Drift identity: the generator applied to rho equals half the sum of the
// index forms of the Jacobi fields driven by each noise coordinate. With
// X-side boundary U e_i and Y-side boundary V O e_i (perpendicular parts),
// I(J_i, J_i) = |a_i|^2 I11 + |b_i|^2 I22 + 2 <a_i, b_i> I12.

struct DriftRow {
    int r;
    int d;
    double alpha;
    double rho;
    double formula;
    double index_half_sum;
    double rel_err;
};

inline double index_form_half_sum(const SpaceSpec& s, double alpha, const IndexFormValues& iv) {
    const RotationCoupling coupling(s, RateSpec{0.0}, alpha);
    const Mat o = coupling.noise_map(alpha);
    const int n = coupling.noise_dim();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double aa = 0.0, bb = 0.0, ab = 0.0;
        for (int j = 1; j < s.dim; ++j) {  // perpendicular coordinates only
            const double a = (i == j) ? 1.0 : 0.0;
            const double b = o(j, i);
            aa += a * a;
            bb += b * b;
            ab += a * b;
        }
        sum += aa * iv.i11 + bb * iv.i22 + 2.0 * ab * iv.i12;
    }
    return 0.5 * sum;
}

inline std::vector<DriftRow> drift_identity_check(int r, int d, const std::vector<double>& alphas, const std::vector<double>& rhos) {
    const SpaceSpec s(r, d);
    std::vector<DriftRow> rows;
    for (double rho : rhos) {
        const auto iv = index_form_by_quadrature(r, rho);
        for (double alpha : alphas) {
            const double formula = rotation_drift(s, alpha, rho);
            const double quad = index_form_half_sum(s, alpha, iv);
            rows.push_back({r, d, alpha, rho, formula, quad, std::abs(formula - quad) / std::max(1.0, std::abs(quad))});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Gradient maximum principle on a spherical cap around the north pole
// (0, 0, 1): u = Re(z^n) with z = (x1 + i x2) / (1 + x3) is harmonic, and
// for the fixed-distance coupling stopped at the first exit of either
// particle, E[u(X) - u(Y)] = u(x) - u(y). u is harmonic on the whole sphere
// minus the south pole, so stopping the chain at its first sample outside
// the cap is an exact optional-stopping time; the interpolated exit points
// are not positions of the chain and carry an O(sqrt h) bias.

inline SpacePoint polar_point(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline double cap_harmonic(const SpacePoint& p, int n) {
    const std::complex<double> z(p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2]));
    return std::pow(z, n).real();
}

// |grad u| at polar angle theta: n |z|^{n-1} (1 + |z|^2) / 2 with |z| = tan(theta/2).
inline double cap_harmonic_grad_norm(double theta, int n) {
    if (n == 0) return 0.0;
    const double z = std::tan(theta / 2);
    return n * std::pow(z, n - 1) * (1.0 + z * z) / 2.0;
}

struct MaxPrincipleConfig {
    double cap_angle = std::numbers::pi / 3;
    int harmonic = 1;
    std::vector<double> interior_angles{0.0, std::numbers::pi / 6};  // polar angles of x
    double separation = 0.1;
    long n_paths = 10000;
    double h = 1e-3;
    double T = 10.0;
    std::uint64_t seed = kBuiltinSeed;
    int threads = 0;
};

struct MaxPrincipleRow {
    double theta;
    double martingale_z;    // u evaluated at the stopped samples
    double interpolated_z;  // u at the linearly interpolated exit points
    double grad_estimate;
    double grad_se;
    double grad_exact;
    double boundary_max;
    bool pass;
};

inline std::vector<MaxPrincipleRow> max_principle_demo(const MaxPrincipleConfig& c) {
    if (!(c.cap_angle > 0.0 && c.cap_angle < std::numbers::pi / 2)) throw DomainError("cap must be smaller than a hemisphere");
    if (c.harmonic < 0) throw DomainError("harmonic index must be non-negative");
    const double cos_cap = std::cos(c.cap_angle);
    const int n = c.harmonic;
    const double boundary_max = cap_harmonic_grad_norm(c.cap_angle, n);
    const FixedDistanceCouplingS2 coupling(SpaceSpec::sphere(2));
    const SpaceSpec s2 = SpaceSpec::sphere(2);
    std::vector<MaxPrincipleRow> rows;

    for (double theta : c.interior_angles) {
        if (!(theta >= 0.0 && theta + c.separation < c.cap_angle)) throw DomainError("interior point too close to the boundary");
        const SpacePoint x = polar_point(theta, 0.0);
        // gradient direction by central differences in the (e_theta, e_phi) frame
        const Vec e_theta{std::cos(theta), 0.0, -std::sin(theta)};
        const Vec e_phi{0.0, 1.0, 0.0};
        const double dd = 1e-6;
        auto derivative = [&](const Vec& e) {
            return (cap_harmonic(geodesic_point(s2, x, e, dd), n) - cap_harmonic(geodesic_point(s2, x, e, -dd), n)) / (2 * dd);
        };
        Vec g = derivative(e_theta) * e_theta + derivative(e_phi) * e_phi;
        const Vec dir = g.norm() > 1e-9 ? g.normalized() : e_theta;
        const SpacePoint y = geodesic_point(s2, x, dir, c.separation);
        const double ux = cap_harmonic(x, n), uy = cap_harmonic(y, n);
        const CouplingState initial = coupling.start(x, y);
        const long max_steps = std::lround(c.T / c.h);

        // Per path: u(X) - u(Y) at the first sample with either particle
        // outside the cap, and the same at the linearly interpolated exit.
        const auto diffs = parallel_map(c.n_paths, c.threads, [&](long path) {
            NoiseStream rng(c.seed, static_cast<std::uint64_t>(path));
            CouplingState st = initial;
            SpacePoint px = st.x, py = st.y;
            std::array<double, 2> out{};
            bool exited = false;
            simulate_path(coupling, st, c.h, max_steps, rng, [&](long i, const CouplingState& cs) {
                if (i == 0) return true;
                const double fx = cs.x[2] - cos_cap, fy = cs.y[2] - cos_cap;
                if (fx >= 0.0 && fy >= 0.0) {
                    px = cs.x;
                    py = cs.y;
                    return true;
                }
                exited = true;
                out[0] = cap_harmonic(cs.x, n) - cap_harmonic(cs.y, n);
                double lambda = 1.0;
                const double gx = px[2] - cos_cap, gy = py[2] - cos_cap;
                if (fx < 0.0) lambda = std::min(lambda, gx / (gx - fx));
                if (fy < 0.0) lambda = std::min(lambda, gy / (gy - fy));
                const SpacePoint sx = (px + lambda * (cs.x - px)).normalized();
                const SpacePoint sy = (py + lambda * (cs.y - py)).normalized();
                out[1] = cap_harmonic(sx, n) - cap_harmonic(sy, n);
                return false;
            });
            if (!exited) out[0] = out[1] = cap_harmonic(st.x, n) - cap_harmonic(st.y, n);
            return out;
        });
        RunningStats st, interp;
        for (const auto& v : diffs) {
            st.add(v[0]);
            interp.add(v[1]);
        }
        MaxPrincipleRow row{};
        row.theta = theta;
        row.martingale_z = z_score(st, ux - uy);
        row.interpolated_z = z_score(interp, ux - uy);
        row.grad_estimate = -st.mean / c.separation;
        row.grad_se = st.stderr_mean() / c.separation;
        row.grad_exact = cap_harmonic_grad_norm(theta, n);
        row.boundary_max = boundary_max;
        row.pass = std::abs(row.martingale_z) < 3.0 && row.grad_estimate <= boundary_max + 3.0 * row.grad_se;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace shyc
