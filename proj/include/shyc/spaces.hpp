#pragma once

// The three simply connected model spaces of constant curvature r in
// {-1, 0, +1}: Euclidean R^d, the unit sphere S^d in R^{d+1} and the
// hyperboloid sheet H^d in Minkowski space R^{1,d}. Points and tangent
// vectors are carried in ambient coordinates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "smallmat.hpp"

namespace shyc {

using SpacePoint = Vec;

struct TangentVector {
    SpacePoint base;
    Vec vector;
};

// Curvature sign and intrinsic dimension. Other curvatures reduce to these
// by rescaling distances by sqrt|r| and time by |r|.
struct SpaceSpec {
    int curvature = 1;
    int dim = 2;

    SpaceSpec() = default;
    SpaceSpec(int r, int d) : curvature(r), dim(d) {
        if (r < -1 || r > 1) throw DomainError("curvature must be -1, 0 or +1");
        if (d < 2 || ambient_dim() > kMaxDim) throw DomainError("dimension " + std::to_string(d));
    }

    static SpaceSpec sphere(int d) { return {1, d}; }
    static SpaceSpec euclidean(int d) { return {0, d}; }
    static SpaceSpec hyperbolic(int d) { return {-1, d}; }

    [[nodiscard]] int ambient_dim() const noexcept { return curvature == 0 ? dim : dim + 1; }
    [[nodiscard]] bool has_cut_locus() const noexcept { return curvature > 0; }

    // Sign of the first coordinate in the ambient bilinear form.
    [[nodiscard]] double inner(const Vec& a, const Vec& b) const noexcept {
        double s = a.dot(b);
        if (curvature < 0) s -= 2.0 * a[0] * b[0];
        return s;
    }
    [[nodiscard]] double tangent_norm(const Vec& v) const noexcept { return std::sqrt(std::max(0.0, inner(v, v))); }

    [[nodiscard]] std::string name() const {
        const char* n = curvature > 0 ? "sphere" : curvature < 0 ? "hyperbolic" : "euclidean";
        return std::string(n) + ":" + std::to_string(dim);
    }

    friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

// ---------------------------------------------------------------------------
// Generalized sine/cosine: gs = sin(sqrt(r) t)/sqrt(r), gc = cos(sqrt(r) t)
// with sinh/cosh at r = -1 and (t, 1) at r = 0.

inline double gen_sin(int r, double t) {
    if (r > 0) return std::sin(t);
    if (r < 0) return std::sinh(t);
    return t;
}

inline double gen_cos(int r, double t) {
    if (r > 0) return std::cos(t);
    if (r < 0) return std::cosh(t);
    return 1.0;
}

// ---------------------------------------------------------------------------
// Points

inline SpacePoint origin(const SpaceSpec& s) { return s.curvature == 0 ? Vec(s.dim) : Vec::basis(s.ambient_dim(), 0); }

inline double constraint_residual(const SpaceSpec& s, const SpacePoint& p) {
    if (p.size() != s.ambient_dim()) return std::numeric_limits<double>::infinity();
    if (s.curvature > 0) return std::abs(p.dot(p) - 1.0);
    if (s.curvature < 0) return p[0] > 0.0 ? std::abs(s.inner(p, p) + 1.0) : std::numeric_limits<double>::infinity();
    return 0.0;
}

inline void require_point(const SpaceSpec& s, const SpacePoint& p, const char* what = "point") {
    if (p.size() != s.ambient_dim()) throw DomainError(std::string(what) + " has the wrong ambient dimension for " + s.name());
    if (!p.all_finite()) throw DomainError(std::string(what) + " is not finite");
    if (constraint_residual(s, p) > 1e-10 * std::max(1.0, p.dot(p)))
        throw DomainError(std::string(what) + " is off the model space " + s.name());
}

// Pull a drifted point back onto the model space.
inline SpacePoint project(const SpaceSpec& s, SpacePoint p) {
    if (s.curvature > 0) return p.normalized();
    if (s.curvature < 0) {
        double spatial = 0.0;
        for (int i = 1; i < p.size(); ++i) spatial += p[i] * p[i];
        p[0] = std::sqrt(1.0 + spatial);
    }
    return p;
}

inline Vec tangent_project(const SpaceSpec& s, const SpacePoint& p, const Vec& v) {
    if (s.curvature > 0) return v - p.dot(v) * p;
    if (s.curvature < 0) return v + s.inner(p, v) * p;
    return v;
}

inline double tangency_residual(const SpaceSpec& s, const TangentVector& v) {
    return s.curvature == 0 ? 0.0 : std::abs(s.inner(v.base, v.vector));
}

// ---------------------------------------------------------------------------
// Metric geometry

inline double distance(const SpaceSpec& s, const SpacePoint& p, const SpacePoint& q) {
    if (p.size() != s.ambient_dim() || q.size() != s.ambient_dim())
        throw DomainError("distance between points of different spaces");
    if (s.curvature > 0) {
        const double c = p.dot(q);
        const double sn = (q - c * p).norm();
        return std::atan2(sn, c);
    }
    const Vec diff = q - p;
    if (s.curvature < 0) {
        const double chord = std::sqrt(std::max(0.0, s.inner(diff, diff)));
        return 2.0 * std::asinh(0.5 * chord);
    }
    return diff.norm();
}

// Euclidean length of x - y in the ambient space.
inline double chordal_distance(const SpacePoint& p, const SpacePoint& q) { return (p - q).norm(); }

// Distance to the cut-locus that log_map treats as "on" it.
inline constexpr double kCutLocusTol = 1e-8;

// Unit tangent gamma'(0) of the minimizing geodesic from p to q and its
// length rho.
struct GeodesicData {
    Vec start_dir;
    Vec end_dir;
    double rho = 0.0;
};

inline GeodesicData geodesic(const SpaceSpec& s, const SpacePoint& p, const SpacePoint& q) {
    const double rho = distance(s, p, q);
    if (s.curvature > 0 && rho > std::numbers::pi - kCutLocusTol)
        throw CutLocusError("antipodal points have no unique geodesic");
    if (rho == 0.0) throw DegeneracyError("geodesic between coincident points");
    GeodesicData g;
    g.rho = rho;
    if (s.curvature > 0) {
        g.start_dir = (q - p.dot(q) * p).normalized();
        g.end_dir = tangent_project(s, q, -std::sin(rho) * p + std::cos(rho) * g.start_dir);
        g.end_dir /= s.tangent_norm(g.end_dir);
    } else if (s.curvature < 0) {
        Vec w = q + s.inner(p, q) * p;
        g.start_dir = w / s.tangent_norm(w);
        g.end_dir = tangent_project(s, q, std::sinh(rho) * p + std::cosh(rho) * g.start_dir);
        g.end_dir /= s.tangent_norm(g.end_dir);
    } else {
        g.start_dir = (q - p) / rho;
        g.end_dir = g.start_dir;
    }
    return g;
}

// Point at arclength t along the geodesic from p with unit initial velocity u.
inline SpacePoint geodesic_point(const SpaceSpec& s, const SpacePoint& p, const Vec& u, double t) {
    if (s.curvature > 0) return project(s, std::cos(t) * p + std::sin(t) * u);
    if (s.curvature < 0) return project(s, std::cosh(t) * p + std::sinh(t) * u);
    return p + t * u;
}

// exp_p(s v) for a unit tangent vector v.
inline SpacePoint exp_map(const SpaceSpec& s, const TangentVector& v, double length) {
    require_point(s, v.base, "base");
    if (std::abs(s.tangent_norm(v.vector) - 1.0) > 1e-10) throw DomainError("exp_map expects a unit tangent vector");
    if (tangency_residual(s, v) > 1e-10) throw DomainError("exp_map vector is not tangent at its base");
    return geodesic_point(s, v.base, v.vector, length);
}

// exp_p(w) for an arbitrary tangent vector w (no validation; hot path).
inline SpacePoint exp_tangent(const SpaceSpec& s, const SpacePoint& p, const Vec& w) {
    const double len = s.tangent_norm(w);
    if (len == 0.0) return p;
    return geodesic_point(s, p, w / len, len);
}

inline TangentVector log_map(const SpaceSpec& s, const SpacePoint& p, const SpacePoint& q) {
    const double rho = distance(s, p, q);
    if (rho == 0.0) return {p, Vec(s.ambient_dim())};
    const auto g = geodesic(s, p, q);
    return {p, g.rho * g.start_dir};
}

// Transport of v along the minimizing geodesic from v.base to q: the
// component along gamma'(0) goes to gamma'(rho), the orthogonal complement
// of span(p, gamma'(0)) is fixed.
inline TangentVector parallel_transport(const SpaceSpec& s, const TangentVector& v, const SpacePoint& q) {
    const double rho = distance(s, v.base, q);
    if (rho == 0.0) return {q, v.vector};
    const auto g = geodesic(s, v.base, q);
    const double a = s.inner(v.vector, g.start_dir);
    return {q, v.vector - a * g.start_dir + a * g.end_dir};
}

inline bool near_cut_locus(const SpaceSpec& s, const SpacePoint& p, const SpacePoint& q, double eps) {
    if (!s.has_cut_locus()) return false;
    return distance(s, p, q) > std::numbers::pi - eps;
}

// Orthonormal basis of T_p M whose first vector is the unit tangent
// `first` (skipped when empty); the rest come from pivoted Gram-Schmidt on
// the ambient axes.
inline std::vector<Vec> tangent_frame(const SpaceSpec& s, const SpacePoint& p, const Vec& first = Vec()) {
    std::vector<Vec> frame;
    frame.reserve(static_cast<std::size_t>(s.dim));
    if (first.size() > 0) frame.push_back(first);
    const int n = s.ambient_dim();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    while (static_cast<int>(frame.size()) < s.dim) {
        int best = -1;
        double best_norm = -1.0;
        Vec best_vec;
        for (int i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            Vec v = tangent_project(s, p, Vec::basis(n, i));
            for (const auto& e : frame) v -= s.inner(e, v) * e;
            const double nv = s.tangent_norm(v);
            if (nv > best_norm) {
                best_norm = nv;
                best = i;
                best_vec = v;
            }
        }
        if (best < 0 || best_norm < 1e-8) throw DegeneracyError("tangent frame completion failed");
        used[static_cast<std::size_t>(best)] = true;
        // second pass for numerical orthogonality
        for (const auto& e : frame) best_vec -= s.inner(e, best_vec) * e;
        frame.push_back(best_vec / s.tangent_norm(best_vec));
    }
    return frame;
}

// Canonical placement: x at the pole, y at distance rho0 along the first
// tangent axis.
struct PointPair {
    SpacePoint x;
    SpacePoint y;
};

inline PointPair canonical_pair(const SpaceSpec& s, double rho0) {
    if (!(rho0 >= 0.0)) throw DomainError("negative starting distance");
    if (s.curvature > 0 && rho0 > std::numbers::pi) throw DomainError("sphere distance above pi");
    const SpacePoint x = origin(s);
    const Vec u = Vec::basis(s.ambient_dim(), s.curvature == 0 ? 0 : 1);
    return {x, geodesic_point(s, x, u, rho0)};
}

// ---------------------------------------------------------------------------
// Jacobi fields and index forms along a geodesic of length rho

struct JacobiCoefficients {
    double w1;
    double w2;
};

inline void require_no_conjugate(int r, double rho) {
    if (r < -1 || r > 1) throw DomainError("curvature must be -1, 0 or +1");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("geodesic length must be positive");
    if (r > 0 && rho >= std::numbers::pi) throw ConjugatePointError("rho >= pi on the unit sphere");
}

// Scalar coefficients of the Jacobi field J = w1 xi(s) + w2 eta(s) with
// boundary values (xi, eta): w1(0) = 1, w1(rho) = 0, w2(0) = 0, w2(rho) = 1.
inline JacobiCoefficients jacobi_coefficients(int r, double rho, double s) {
    require_no_conjugate(r, rho);
    if (s < 0.0 || s > rho) throw DomainError("arclength outside [0, rho]");
    const double denom = gen_sin(r, rho);
    return {gen_sin(r, rho - s) / denom, gen_sin(r, s) / denom};
}

// Index form values for perpendicular Jacobi fields J1 = w1 E, J2 = w2 E
// (E parallel and orthogonal to the geodesic):
//   I11 = I(J1, J1), I22 = I(J2, J2), I12 = I(J1, J2).
struct IndexFormValues {
    double i11;
    double i22;
    double i12;
    double rho;

    // I(J, J) for the field with scalar boundary values (a, b).
    [[nodiscard]] double quadratic(double a, double b) const noexcept { return a * a * i11 + b * b * i22 + 2.0 * a * b * i12; }
};

// Boundary-term evaluation <J'(rho), J(rho)> - <J'(0), J(0)>.
inline IndexFormValues index_form_closed(int r, double rho) {
    require_no_conjugate(r, rho);
    const double gs = gen_sin(r, rho), gc = gen_cos(r, rho);
    return {gc / gs, gc / gs, -1.0 / gs, rho};
}

inline constexpr int kQuadratureIntervals = 4000;

// Integral of (f'^2 - r f^2) over [0, rho] for a scalar profile f; the
// field V = f E with E parallel and perpendicular. Composite Simpson.
inline double index_form_of_profile(int r, double rho, const std::function<double(double)>& f,
                                    const std::function<double(double)>& fdot, int intervals = kQuadratureIntervals) {
    if (!(rho > 0.0)) throw DomainError("geodesic length must be positive");
    if (intervals < 2 || intervals % 2 != 0) throw DomainError("Simpson needs an even interval count");
    const double h = rho / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double s = i * h;
        const double fd = fdot(s), fv = f(s);
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * (fd * fd - r * fv * fv);
    }
    return sum * h / 3.0;
}

// Index form of the Jacobi field with scalar boundary values (w0, w_rho):
// shoot the ODE w'' + r w = 0 with RK4 and integrate the energy with
// Simpson on the RK4 nodes. Independent of the closed forms above.
inline double index_form_quadrature(int r, double rho, double w0, double w_rho, int intervals = kQuadratureIntervals) {
    require_no_conjugate(r, rho);
    if (intervals < 2 || intervals % 2 != 0) throw DomainError("Simpson needs an even interval count");
    const double h = rho / intervals;
    struct State {
        double w, v;
    };
    auto rk4 = [&](State st, std::vector<State>* out) {
        if (out) out->push_back(st);
        for (int i = 0; i < intervals; ++i) {
            auto f = [r](State z) { return State{z.v, -r * z.w}; };
            const State k1 = f(st);
            const State k2 = f({st.w + 0.5 * h * k1.w, st.v + 0.5 * h * k1.v});
            const State k3 = f({st.w + 0.5 * h * k2.w, st.v + 0.5 * h * k2.v});
            const State k4 = f({st.w + h * k3.w, st.v + h * k3.v});
            st.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
            st.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
            if (out) out->push_back(st);
        }
        return st;
    };
    // w = w0 * phi + sigma * psi with phi(0) = 1, phi'(0) = 0, psi(0) = 0, psi'(0) = 1
    const State phi_end = rk4({1.0, 0.0}, nullptr);
    const State psi_end = rk4({0.0, 1.0}, nullptr);
    if (std::abs(psi_end.w) < 1e-12) throw ConjugatePointError("shooting solution singular");
    const double sigma = (w_rho - w0 * phi_end.w) / psi_end.w;
    std::vector<State> path;
    path.reserve(static_cast<std::size_t>(intervals) + 1);
    rk4({w0, sigma}, &path);
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const auto& z = path[static_cast<std::size_t>(i)];
        const double wgt = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += wgt * (z.v * z.v - r * z.w * z.w);
    }
    return sum * h / 3.0;
}

// I11, I22, I12 assembled from index_form_quadrature by polarization.
inline IndexFormValues index_form_by_quadrature(int r, double rho) {
    const double i11 = index_form_quadrature(r, rho, 1.0, 0.0);
    const double i22 = index_form_quadrature(r, rho, 0.0, 1.0);
    const double both = index_form_quadrature(r, rho, 1.0, 1.0);
    return {i11, i22, 0.5 * (both - i11 - i22), rho};
}

}  // namespace shyc
