#pragma once

// Coupling strategies behind one interface: given the current pair and a
// fresh draw of noise, advance both particles by one step of size h.

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drivers.hpp"
#include "errors.hpp"
#include "smallmat.hpp"
#include "spaces.hpp"

namespace shyc {

enum class Regime { Coupled, Independent };

inline const char* regime_name(Regime r) noexcept { return r == Regime::Coupled ? "COUPLED" : "INDEPENDENT"; }

// Gaussian draws for one step; both vectors have Strategy::noise_dim()
// standard normal components and are scaled by sqrt(h) where used.
struct StepNoise {
    Vec primary;
    Vec auxiliary;
};

struct CouplingState {
    double t = 0.0;
    SpacePoint x;
    SpacePoint y;
    Regime regime = Regime::Coupled;
    bool met = false;  // glued after meeting (mirror coupling)

    // which neighbourhood forced the independent regime
    enum class Zone { None, CutLocus, Diagonal } zone = Zone::None;

    // strategy caches
    Vec offset;            // translation: y - x
    Mat frame_flow;        // so3-flow: Z_t
    SpacePoint anchor_x;   // so3-flow: x_0
    SpacePoint anchor_y;   // so3-flow: y_0
    GeodesicData geodesic; // rotation: last step's gamma'(0), gamma'(rho), rho
    double alpha = 0.0;    // rotation: last rotation angle
};

struct RateSpec {
    double k = 0.0;
};

class Strategy {
public:
    explicit Strategy(SpaceSpec space) : space_(space) {}
    virtual ~Strategy() = default;

    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] virtual int noise_dim() const = 0;

    // Validate the starting pair and fill the caches.
    [[nodiscard]] virtual CouplingState start(const SpacePoint& x, const SpacePoint& y) const {
        require_point(space_, x, "x");
        require_point(space_, y, "y");
        CouplingState st;
        st.x = x;
        st.y = y;
        resync(st);
        return st;
    }

    virtual void step(CouplingState& st, const StepNoise& noise, double h) const = 0;

    // Move one particle by itself (independent regime).
    [[nodiscard]] virtual SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const {
        const auto frame = tangent_frame(space_, p);
        return geodesic_walk_step(space_, p, noise, h, frame);
    }

    // Rebuild caches from (x, y) after the pair moved outside step().
    virtual void resync(CouplingState&) const {}

    [[nodiscard]] const SpaceSpec& space() const noexcept { return space_; }
    [[nodiscard]] double distance(const CouplingState& st) const { return shyc::distance(space_, st.x, st.y); }

protected:
    SpaceSpec space_;
};

namespace detail {

inline void require_s2(const SpaceSpec& s, const std::string& id) {
    if (s != SpaceSpec::sphere(2)) throw DomainError(id + " is defined on sphere:2 only");
}

inline SpacePoint stroock_solo(const SpacePoint& p, const Vec& noise, double h) { return stroock_step(p, noise, h); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Euclidean translation: Y = X + (y0 - x0).

class TranslationCoupling final : public Strategy {
public:
    explicit TranslationCoupling(SpaceSpec s) : Strategy(s) {
        if (s.curvature != 0) throw DomainError("translation coupling needs a Euclidean space");
    }
    [[nodiscard]] std::string id() const override { return "translation"; }
    [[nodiscard]] int noise_dim() const override { return space_.dim; }

    void resync(CouplingState& st) const override { st.offset = st.y - st.x; }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        if (!(h > 0.0)) throw DomainError("step size must be positive");
        st.x += std::sqrt(h) * noise.primary;
        st.y = st.x + st.offset;
        st.t += h;
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return p + std::sqrt(h) * noise;
    }
};

// ---------------------------------------------------------------------------
// Independent coordinates: the trivial (product) coupling.

class IndependentCoupling final : public Strategy {
public:
    using Strategy::Strategy;
    [[nodiscard]] std::string id() const override { return "independent"; }
    [[nodiscard]] int noise_dim() const override { return space_.dim; }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        st.x = solo_step(st.x, noise.primary, h);
        st.y = solo_step(st.y, noise.auxiliary, h);
        st.t += h;
    }
};

// ---------------------------------------------------------------------------
// S^2 constructions driven by Stroock's equation in R^3.

// Reflection of the driving noise across the bisector plane of x and y.
// With Stroock's step the mirrored Y update is exactly R X_{n+1}, so Y's
// one-step kernel is k_X o R. Each step is a reflection-maximal coupling:
// Y takes X_{n+1} with probability min(1, k_Y/k_X) there, else R X_{n+1}.
// Both marginals are exact Euler chains and the pair meets at a grid time.
class MirrorCouplingS2 final : public Strategy {
public:
    explicit MirrorCouplingS2(SpaceSpec s) : Strategy(s) { detail::require_s2(s, id()); }
    [[nodiscard]] std::string id() const override { return "mirror-s2"; }
    [[nodiscard]] int noise_dim() const override { return 3; }

    // log density (up to a common constant) of stroock_step(from, ., h) at p
    static double log_kernel(const SpacePoint& from, const SpacePoint& p, double h) {
        const double c = p.dot(from);
        if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
        const Vec w = (1.0 - h) * (p / c - from);
        return -w.dot(w) / (2.0 * h) - 3.0 * std::log(c);
    }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        const Vec& db = noise.primary;
        const SpacePoint next = stroock_step(st.x, db, h);
        if (st.met) {
            st.x = next;
            st.y = next;
        } else {
            const Vec diff = st.x - st.y;
            const double chord = diff.norm();
            SpacePoint mirrored = next;
            if (chord > 0.0) {
                const Vec n = diff / chord;
                mirrored = next - 2.0 * n.dot(next) * n;
            }
            const double log_ratio = log_kernel(st.y, next, h) - log_kernel(st.x, next, h);
            const double u = 0.5 * std::erfc(-noise.auxiliary[0] / std::sqrt(2.0));
            if (chord == 0.0 || std::log(u) < log_ratio) {
                st.y = next;
                st.met = true;
            } else {
                st.y = mirrored.normalized();
            }
            st.x = next;
        }
        st.t += h;
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return detail::stroock_solo(p, noise, h);
    }
};

// Y_t = y + int R_{X,Y} dX: Y is X rotated by the Rodrigues rotation taking
// x to y, so the chord shrinks like e^{-t/2}. The expanding variant runs the
// same construction on (x, -y) and negates.
class ExtrinsicCouplingS2 final : public Strategy {
public:
    ExtrinsicCouplingS2(SpaceSpec s, bool expanding) : Strategy(s), expanding_(expanding) { detail::require_s2(s, id()); }
    [[nodiscard]] std::string id() const override { return expanding_ ? "extrinsic-expand-s2" : "extrinsic-contract-s2"; }
    [[nodiscard]] int noise_dim() const override { return 3; }
    [[nodiscard]] bool expanding() const noexcept { return expanding_; }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        const Vec target = expanding_ ? -st.y : st.y;
        const Mat r = rodrigues_rotation(st.x, target);
        const SpacePoint x_next = stroock_step(st.x, noise.primary, h);
        // y + R (X_{n+1} - X_n) = R X_{n+1}, renormalized
        Vec y_next = (r * x_next).normalized();
        st.x = x_next;
        st.y = expanding_ ? -y_next : y_next;
        st.t += h;
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return detail::stroock_solo(p, noise, h);
    }

private:
    bool expanding_;
};

// Fixed-distance coupling: dW = J dB + K dC with (J, K) from the explicit
// frame-aligned matrices.
class FixedDistanceCouplingS2 final : public Strategy {
public:
    explicit FixedDistanceCouplingS2(SpaceSpec s) : Strategy(s) { detail::require_s2(s, id()); }
    [[nodiscard]] std::string id() const override { return "fixed-s2"; }
    [[nodiscard]] int noise_dim() const override { return 3; }

    [[nodiscard]] CouplingState start(const SpacePoint& x, const SpacePoint& y) const override {
        auto st = Strategy::start(x, y);
        (void)frame_align(x, y);  // rejects x = +-y up front
        return st;
    }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        const auto m = fixed_distance_matrices(st.x, st.y);
        const Vec dw = kendall_compose(m.j, m.k, noise.primary, noise.auxiliary);
        st.x = stroock_step(st.x, noise.primary, h);
        st.y = stroock_step(st.y, dw, h);
        st.t += h;
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return detail::stroock_solo(p, noise, h);
    }
};

// Both points carried by one SO(3)-valued random walk: X = Z x0, Y = Z y0.
class SO3FlowCoupling final : public Strategy {
public:
    explicit SO3FlowCoupling(SpaceSpec s) : Strategy(s) { detail::require_s2(s, id()); }
    [[nodiscard]] std::string id() const override { return "so3-flow"; }
    [[nodiscard]] int noise_dim() const override { return 3; }

    void resync(CouplingState& st) const override {
        st.frame_flow = Mat::identity(3);
        st.anchor_x = st.x;
        st.anchor_y = st.y;
    }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        st.frame_flow = so3_flow_step(st.frame_flow, noise.primary, h);
        st.x = st.frame_flow * st.anchor_x;
        st.y = st.frame_flow * st.anchor_y;
        st.t += h;
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return detail::stroock_solo(p, noise, h);
    }
};

// ---------------------------------------------------------------------------
// Intrinsic rotation coupling on any model space.
//
// X moves by the geodesic walk with noise G in an orthonormal frame E^x with
// E^x_1 = gamma'(0). Y moves with noise O G in the transported frame, where
// O = A_V B' A_U' fixes the geodesic direction (so rho has no martingale
// part) and rotates each perpendicular 2-plane by alpha. Even d pairs the
// last perpendicular direction with one fictitious dimension (N = d + 1).
// Along the flow rho has drift (d-1)(gc(rho) - cos alpha)/gs(rho).

// cos(alpha) making the drift equal -k rho / 2.
inline double rate_cos_alpha(const SpaceSpec& s, double k, double rho) {
    return gen_cos(s.curvature, rho) + k * rho * gen_sin(s.curvature, rho) / (2.0 * (s.dim - 1));
}

inline double rotation_drift(const SpaceSpec& s, double alpha, double rho) {
    return (s.dim - 1) * (gen_cos(s.curvature, rho) - std::cos(alpha)) / gen_sin(s.curvature, rho);
}

inline bool rate_feasible(const SpaceSpec& s, double k, double rho) {
    const double c = rate_cos_alpha(s, k, rho);
    return std::isfinite(c) && std::abs(c) <= 1.0;
}

// Angle realizing rate k at distance rho; throws when none exists.
inline double rate_alpha(const SpaceSpec& s, double k, double rho) {
    const double c = rate_cos_alpha(s, k, rho);
    if (!std::isfinite(c) || std::abs(c) > 1.0) {
        std::ostringstream msg;
        msg << "no rotation realizes rate k=" << k << " on " << s.name() << " at rho=" << rho
            << " (cos alpha would be " << c << ")";
        throw InfeasibleRateError(msg.str());
    }
    return solve_alpha(1.0, 0.0, c);
}

class RotationCoupling final : public Strategy {
public:
    RotationCoupling(SpaceSpec s, RateSpec rate, std::optional<double> alpha_override = std::nullopt)
        : Strategy(s), rate_(rate), alpha_override_(alpha_override) {
        if (alpha_override_) {
            if (!std::isfinite(*alpha_override_)) throw DomainError("alpha-override must be finite");
        } else {
            if (!std::isfinite(rate_.k)) throw DomainError("rate k must be finite");
            // cos alpha > 1 at every rho > 0
            if (s.curvature == 0 && rate_.k > 0.0)
                throw InfeasibleRateError("no Markovian coupling contracts at a positive rate in flat space (k=" +
                                          std::to_string(rate_.k) + ")");
            if (s.curvature < 0 && rate_.k >= 0.0)
                throw InfeasibleRateError("no Markovian coupling realizes k >= 0 in negative curvature (k=" +
                                          std::to_string(rate_.k) + ")");
        }
        n_ = s.dim % 2 ? s.dim : s.dim + 1;
        const Mat a_u = NFrame::canonical(Vec(s.dim), s.dim, n_).alignment();
        a_u_t_ = a_u.transpose();
        a_v_ = a_u;
    }

    [[nodiscard]] std::string id() const override { return "rotation"; }
    [[nodiscard]] int noise_dim() const override { return n_; }
    [[nodiscard]] const RateSpec& rate() const noexcept { return rate_; }
    [[nodiscard]] const std::optional<double>& alpha_override() const noexcept { return alpha_override_; }

    [[nodiscard]] double alpha_at(double rho) const {
        if (alpha_override_) return *alpha_override_;
        return rate_alpha(space_, rate_.k, rho);
    }

    [[nodiscard]] CouplingState start(const SpacePoint& x, const SpacePoint& y) const override {
        auto st = Strategy::start(x, y);
        const double rho = distance(st);
        if (rho > 0.0 && !(space_.has_cut_locus() && rho > std::numbers::pi - kCutLocusTol)) st.alpha = alpha_at(rho);
        return st;
    }

    // O_{U,V} = A_V B' A_U' for the canonical N-frames.
    [[nodiscard]] Mat noise_map(double alpha) const {
        return a_v_ * block_rotation(n_ - 1, alpha, true).transpose() * a_u_t_;
    }

    // Ambient increments (before sqrt(h) scaling) of X and Y for noise g.
    struct Increments {
        Vec dx;
        Vec dy;
    };

    [[nodiscard]] Increments increments(const CouplingState& st, const Vec& g, double alpha) const {
        const auto& geo = st.geodesic;
        const auto ex = tangent_frame(space_, st.x, geo.start_dir);
        const Vec og = noise_map(alpha) * g;
        Increments inc{Vec(space_.ambient_dim()), Vec(space_.ambient_dim())};
        for (int j = 0; j < space_.dim; ++j) {
            const Vec& e = ex[static_cast<std::size_t>(j)];
            // parallel transport: only the gamma' component changes
            const double a = space_.inner(e, geo.start_dir);
            const Vec ey = e - a * geo.start_dir + a * geo.end_dir;
            inc.dx += g[j] * e;
            inc.dy += og[j] * ey;
        }
        return inc;
    }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        if (!(h > 0.0)) throw DomainError("step size must be positive");
        const Vec& g = noise.primary;
        const double rho = distance(st);
        if (rho == 0.0) {
            st.x = solo_step(st.x, g, h);
            st.y = st.x;
            st.t += h;
            return;
        }
        st.geodesic = geodesic(space_, st.x, st.y);
        st.alpha = alpha_at(st.geodesic.rho);
        const auto inc = increments(st, g, st.alpha);
        const double sh = std::sqrt(h);
        if (space_.curvature > 0 && sh * std::max(space_.tangent_norm(inc.dx), space_.tangent_norm(inc.dy)) >= std::numbers::pi / 2)
            throw StepTooLargeError("geodesic step of length >= pi/2 on the sphere");
        st.x = exp_tangent(space_, st.x, sh * inc.dx);
        st.y = exp_tangent(space_, st.y, sh * inc.dy);
        st.t += h;
    }

private:
    RateSpec rate_;
    std::optional<double> alpha_override_;
    int n_ = 0;
    Mat a_u_t_;
    Mat a_v_;
};

// Negative control: reuses the perpendicular noise scaled by cos(alpha)
// without the compensating sin(alpha) components, so Y is not a Brownian
// motion unless |cos(alpha)| = 1. Used to show the marginal test has power.
class BrokenRotationCoupling final : public Strategy {
public:
    BrokenRotationCoupling(SpaceSpec s, double alpha) : Strategy(s), alpha_(alpha) {}
    [[nodiscard]] std::string id() const override { return "broken-rotation"; }
    [[nodiscard]] int noise_dim() const override { return space_.dim; }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        if (distance(st) == 0.0 || near_cut_locus(space_, st.x, st.y, 1e-6)) {
            st.x = solo_step(st.x, noise.primary, h);
            st.t += h;
            return;  // Y frozen: still not a Brownian motion
        }
        const auto geo = geodesic(space_, st.x, st.y);
        const auto ex = tangent_frame(space_, st.x, geo.start_dir);
        Vec dx(space_.ambient_dim()), dy(space_.ambient_dim());
        for (int j = 0; j < space_.dim; ++j) {
            const Vec& e = ex[static_cast<std::size_t>(j)];
            const double a = space_.inner(e, geo.start_dir);
            const Vec ey = e - a * geo.start_dir + a * geo.end_dir;
            dx += noise.primary[j] * e;
            dy += (j == 0 ? 1.0 : std::cos(alpha_)) * noise.primary[j] * ey;
        }
        const double sh = std::sqrt(h);
        st.x = exp_tangent(space_, st.x, sh * dx);
        st.y = exp_tangent(space_, st.y, sh * dy);
        st.t += h;
    }

private:
    double alpha_;
};

// ---------------------------------------------------------------------------
// Patching: run the inner coupling, but switch to independent motion near
// the cut-locus (rho > pi - eps, back below pi - 2 eps) and, for shy
// couplings, near the diagonal (rho < eps/4, back above eps/2).
// Transitions are evaluated after each step.

enum class PatchMode { CutLocus, Diagonal, Both };

class PatchedCoupling final : public Strategy {
public:
    PatchedCoupling(std::unique_ptr<Strategy> inner, double eps, PatchMode mode)
        : Strategy(inner->space()), inner_(std::move(inner)), eps_(eps), mode_(mode) {
        if (!(eps_ > 0.0 && eps_ < std::numbers::pi / 4)) throw DomainError("patching eps must lie in (0, pi/4)");
        if (!space_.has_cut_locus() && mode_ != PatchMode::Diagonal)
            throw DomainError("cut-locus patching needs a space with a cut-locus");
    }

    [[nodiscard]] std::string id() const override { return inner_->id(); }
    [[nodiscard]] int noise_dim() const override { return inner_->noise_dim(); }
    [[nodiscard]] const Strategy& inner() const noexcept { return *inner_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }

    [[nodiscard]] CouplingState start(const SpacePoint& x, const SpacePoint& y) const override {
        require_point(space_, x, "x");
        require_point(space_, y, "y");
        CouplingState st;
        st.x = x;
        st.y = y;
        update_regime(st);
        if (st.regime == Regime::Coupled) st = inner_->start(x, y);
        return st;
    }

    void step(CouplingState& st, const StepNoise& noise, double h) const override {
        if (st.regime == Regime::Coupled) {
            inner_->step(st, noise, h);
        } else {
            st.x = inner_->solo_step(st.x, noise.primary, h);
            st.y = inner_->solo_step(st.y, noise.auxiliary, h);
            st.t += h;
        }
        const Regime before = st.regime;
        update_regime(st);
        if (before == Regime::Independent && st.regime == Regime::Coupled) inner_->resync(st);
    }

    [[nodiscard]] SpacePoint solo_step(const SpacePoint& p, const Vec& noise, double h) const override {
        return inner_->solo_step(p, noise, h);
    }

private:
    [[nodiscard]] bool watch_cut() const noexcept { return mode_ != PatchMode::Diagonal; }
    [[nodiscard]] bool watch_diagonal() const noexcept { return mode_ != PatchMode::CutLocus; }

    void update_regime(CouplingState& st) const {
        const double rho = distance(st);
        using Zone = CouplingState::Zone;
        if (st.regime == Regime::Coupled) {
            if (watch_cut() && rho > std::numbers::pi - eps_) {
                st.regime = Regime::Independent;
                st.zone = Zone::CutLocus;
            } else if (watch_diagonal() && rho < eps_ / 4) {
                st.regime = Regime::Independent;
                st.zone = Zone::Diagonal;
            }
        } else if ((st.zone == Zone::CutLocus && rho < std::numbers::pi - 2 * eps_) ||
                   (st.zone == Zone::Diagonal && rho > eps_ / 2)) {
            st.regime = Regime::Coupled;
            st.zone = Zone::None;
        }
    }

    std::unique_ptr<Strategy> inner_;
    double eps_;
    PatchMode mode_;
};

// ---------------------------------------------------------------------------
// Construction by stable id

struct StrategySpec {
    std::string id = "independent";
    double k = 0.0;
    std::optional<double> alpha_override;
    std::optional<double> eps;  // enables patching

    friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

inline const std::vector<std::string>& strategy_ids() {
    static const std::vector<std::string> ids{"translation", "mirror-s2",  "extrinsic-contract-s2", "extrinsic-expand-s2",
                                              "fixed-s2",    "rotation",   "so3-flow",              "independent"};
    return ids;
}

inline std::unique_ptr<Strategy> make_strategy(const SpaceSpec& s, const StrategySpec& spec) {
    std::unique_ptr<Strategy> out;
    const auto& id = spec.id;
    if (id == "translation") out = std::make_unique<TranslationCoupling>(s);
    else if (id == "mirror-s2") out = std::make_unique<MirrorCouplingS2>(s);
    else if (id == "extrinsic-contract-s2") out = std::make_unique<ExtrinsicCouplingS2>(s, false);
    else if (id == "extrinsic-expand-s2") out = std::make_unique<ExtrinsicCouplingS2>(s, true);
    else if (id == "fixed-s2") out = std::make_unique<FixedDistanceCouplingS2>(s);
    else if (id == "rotation") out = std::make_unique<RotationCoupling>(s, RateSpec{spec.k}, spec.alpha_override);
    else if (id == "so3-flow") out = std::make_unique<SO3FlowCoupling>(s);
    else if (id == "independent") out = std::make_unique<IndependentCoupling>(s);
    else throw DomainError("unknown strategy '" + id + "'");
    if (spec.eps) {
        const auto mode = s.has_cut_locus() ? PatchMode::Both : PatchMode::Diagonal;
        out = std::make_unique<PatchedCoupling>(std::move(out), *spec.eps, mode);
    }
    return out;
}

}  // namespace shyc
