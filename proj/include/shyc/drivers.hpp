#pragma once

// One-step integrators for Brownian motion with generator (1/2) Laplacian.

#include <cmath>
#include <numbers>
#include <span>

#include "errors.hpp"
#include "smallmat.hpp"
#include "spaces.hpp"

namespace shyc {

// Projected Euler step of Stroock's equation dX = (I - XX')dB - X dt on the
// unit sphere (any ambient dimension; the noise lives in the ambient space).
inline SpacePoint stroock_step(const SpacePoint& x, const Vec& noise, double h) {
    if (!(h > 0.0)) throw DomainError("step size must be positive");
    if (noise.size() != x.size()) throw DomainError("Stroock noise must match the ambient dimension");
    const double sh = std::sqrt(h);
    Vec next = (1.0 - h) * x + sh * (noise - x.dot(noise) * x);
    return next.normalized();
}

// Geodesic random walk: move along exp_x(sqrt(h) sum_i noise_i frame_i).
inline SpacePoint geodesic_walk_step(const SpaceSpec& s, const SpacePoint& x, const Vec& noise, double h,
                                     std::span<const Vec> frame) {
    if (!(h > 0.0)) throw DomainError("step size must be positive");
    if (static_cast<int>(frame.size()) != s.dim || noise.size() < s.dim)
        throw DomainError("geodesic walk needs d frame vectors and d noise components");
    Vec w(s.ambient_dim());
    const double sh = std::sqrt(h);
    for (int i = 0; i < s.dim; ++i) w += (sh * noise[i]) * frame[static_cast<std::size_t>(i)];
    if (s.curvature > 0 && s.tangent_norm(w) >= std::numbers::pi / 2)
        throw StepTooLargeError("geodesic step of length >= pi/2 on the sphere");
    return exp_tangent(s, x, w);
}

// Kendall's driver dW = J dB + K dC. Requires J J' + K K' = I.
inline Vec kendall_compose(const Mat& j, const Mat& k, const Vec& db, const Vec& dc) {
    const Mat id = j * j.transpose() + k * k.transpose();
    if (max_abs_diff(id, Mat::identity(j.rows())) > 1e-10)
        throw CouplingConstraintError("J J' + K K' differs from the identity");
    return j * db + k * dc;
}

// Left-invariant random walk on SO(3): Z <- exp(sqrt(h) [g]_x) Z, followed
// by re-orthonormalization. Z x is then spherical Brownian motion.
inline Mat so3_flow_step(const Mat& z, const Vec& noise, double h) {
    if (!(h > 0.0)) throw DomainError("step size must be positive");
    if (z.rows() != 3 || z.cols() != 3 || noise.size() != 3) throw DomainError("SO(3) flow is 3x3 with 3 noise components");
    if (orthogonality_defect(z) > 1e-9 || determinant(z) < 0.0) throw DomainError("SO(3) flow state left the group");
    return orthonormalize_columns(axis_angle_rotation(std::sqrt(h) * noise) * z);
}

}  // namespace shyc
