// odtmotion: rigid-motion estimation for optical diffraction tomography
// Common-circle geometry: for two poses R_s, R_t the rotated data hemispheres
// H_s and H_t (and the reflected pair H_s and -H_t) intersect in circular
// arcs.  This header provides the 3D arcs sigma/sigma*, their validity
// intervals, the in-plane (detector) curves gamma/gamma* whose pullbacks
// under h land on those arcs, and the Euler-angle forms of the in-plane
// curves used by the orientation estimator.
#pragma once

#include <odt/errors.hpp>
#include <odt/geometry.hpp>
#include <odt/types.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace odt {

// =============================================================================
// Validity intervals
// =============================================================================

/// Set of arc parameters beta for which the arc point lies inside the
/// measurement disk of both frames: either the full circle or the symmetric
/// interval [-beta_max, beta_max].  The capped endpoints touch the disk rim,
/// where the hemisphere chart degenerates; beta_max > pi/2 always, so
/// [-pi/2, pi/2] is usable for every non-degenerate pair.
struct ArcInterval {
    bool full = false;
    double beta_max = pi; ///< half-width when not full

    bool contains(double beta) const {
        return full || std::abs(wrap_pi(beta)) <= beta_max;
    }
};

// =============================================================================
// Arc basis of a pose pair
// =============================================================================

/// Geometry shared by all arcs of one ordered pose pair (R_s, R_t).
///
/// With n_s = R_s e3, n_t = R_t e3 and c = <n_s, n_t>, the 3-vectors
///   v1 = (n_s + n_t)/||.||,  v2 = (n_s x n_t)/||.||,  v3 = (n_s - n_t)/||.||
/// form a positively oriented orthonormal basis.  The circle radii are
/// a = (k0/2)||n_s + n_t|| = k0 cos(theta/2) and a* = (k0/2)||n_s - n_t||
/// = k0 sin(theta/2), where theta is the angle between the axes; hence
/// a^2 + a*^2 = k0^2.  The in-plane frame of s is w1 = P(R_s^T n_t)/||.||
/// and w2 = w1 rotated by +90 degrees (P = projection onto the first two
/// coordinates), with in-plane radial amplitude a_tilde = (k0/2)||P(R_s^T n_t)||.
struct ArcBasis {
    Vec3 v1, v2, v3;
    Vec2 w1, w2;
    double a = 0.0;
    double a_tilde = 0.0;
    double a_star = 0.0;
    double c = 0.0; ///< cosine of the axis angle
    double k0 = 0.0;
};

namespace detail {

/// Cosine of the angle between the pose axes R_s e3 and R_t e3, throwing
/// when they are collinear within 1e-6 rad (normalizations would divide by
/// a vanishing norm; callers must take the degenerate branch instead).
inline double axis_cosine_checked(const Rotation &Rs, const Rotation &Rt) {
    const Vec3 ns = Rs.col(2);
    const Vec3 nt = Rt.col(2);
    const double angle = std::atan2(ns.cross(nt).norm(), ns.dot(nt));
    if (angle < 1e-6 || angle > pi - 1e-6) {
        throw DegenerateInputError(
            "common circles: pose axes are collinear; use detect_degenerate");
    }
    return ns.dot(nt);
}

} // namespace detail

/// Build the arc basis of a pose pair.  Throws DegenerateInputError when the
/// pose axes are collinear within 1e-6 rad.
inline ArcBasis arc_basis(const Rotation &Rs, const Rotation &Rt, double k0) {
    if (!(k0 > 0.0)) {
        throw ConfigError("arc_basis: need k0 > 0");
    }
    ArcBasis b;
    b.k0 = k0;
    b.c = detail::axis_cosine_checked(Rs, Rt);
    const Vec3 ns = Rs.col(2);
    const Vec3 nt = Rt.col(2);
    b.v1 = (ns + nt).normalized();
    b.v2 = ns.cross(nt).normalized();
    b.v3 = (ns - nt).normalized();
    b.a = 0.5 * k0 * (ns + nt).norm();
    b.a_star = 0.5 * k0 * (ns - nt).norm();
    const Vec3 rel = Rs.transpose() * nt; // direction of n_t seen from frame s
    b.w1 = Vec2(rel.x(), rel.y()).normalized();
    b.w2 = Vec2(-b.w1.y(), b.w1.x());
    b.a_tilde = 0.5 * k0 * std::hypot(rel.x(), rel.y());
    return b;
}

// =============================================================================
// Validity intervals of a pose pair
// =============================================================================

/// Interval of the primal arc: full iff c <= 0, else capped at
/// beta_max = arccos((c-1)/(c+1)) (the rim-touching parameter).
inline ArcInterval interval_J(const Rotation &Rs, const Rotation &Rt) {
    const double c = detail::axis_cosine_checked(Rs, Rt);
    if (c <= 0.0) {
        return {true, pi};
    }
    return {false, std::acos(std::clamp((c - 1.0) / (c + 1.0), -1.0, 1.0))};
}

/// Interval of the dual arc: full iff c >= 0, else capped at
/// arccos((c+1)/(c-1)).
inline ArcInterval interval_J_dual(const Rotation &Rs, const Rotation &Rt) {
    const double c = detail::axis_cosine_checked(Rs, Rt);
    if (c >= 0.0) {
        return {true, pi};
    }
    return {false, std::acos(std::clamp((c + 1.0) / (c - 1.0), -1.0, 1.0))};
}

// =============================================================================
// Arc evaluation from a basis (no interval checks; estimator workhorses)
// =============================================================================

/// Primal 3D arc: sigma(beta) = a (cos beta - 1) v1 + a sin(beta) v2.
inline Vec3 sigma(const ArcBasis &b, double beta) {
    return b.a * (std::cos(beta) - 1.0) * b.v1 + b.a * std::sin(beta) * b.v2;
}

/// Dual 3D arc: sigma*(beta) = a* (cos beta - 1) v3 - a* sin(beta) v2.
inline Vec3 sigma_dual(const ArcBasis &b, double beta) {
    return b.a_star * (std::cos(beta) - 1.0) * b.v3 -
           b.a_star * std::sin(beta) * b.v2;
}

/// Primal in-plane arc of frame s:
///   gamma(beta) = a_tilde (cos beta - 1) w1 + a sin(beta) w2.
inline Vec2 gamma(const ArcBasis &b, double beta) {
    return b.a_tilde * (std::cos(beta) - 1.0) * b.w1 +
           b.a * std::sin(beta) * b.w2;
}

/// Dual in-plane arc of frame s:
///   gamma*(beta) = -a_tilde (cos beta - 1) w1 - a* sin(beta) w2.
inline Vec2 gamma_dual(const ArcBasis &b, double beta) {
    return -b.a_tilde * (std::cos(beta) - 1.0) * b.w1 -
           b.a_star * std::sin(beta) * b.w2;
}

// =============================================================================
// Contract forms with interval checking
// =============================================================================

namespace detail {

inline void require_in_interval(const ArcInterval &J, double beta,
                                const char *what) {
    if (!J.contains(beta)) {
        throw OutOfDiskError(std::string(what) +
                             ": beta outside the arc validity interval");
    }
}

} // namespace detail

/// sigma for a pose pair with interval enforcement.  The identities
///   sigma_{s,t}(beta) = sigma_{t,s}(-beta)   and
///   || sigma(beta) + k0 R_s e3 || = k0   (arc lies on the hemisphere sphere)
/// hold exactly.
inline Vec3 sigma(const Rotation &Rs, const Rotation &Rt, double beta,
                  double k0) {
    detail::require_in_interval(interval_J(Rs, Rt), beta, "sigma");
    return sigma(arc_basis(Rs, Rt, k0), beta);
}

/// sigma* for a pose pair with interval enforcement;
/// sigma*_{s,t}(beta) = -sigma*_{t,s}(beta).
inline Vec3 sigma_dual(const Rotation &Rs, const Rotation &Rt, double beta,
                       double k0) {
    detail::require_in_interval(interval_J_dual(Rs, Rt), beta, "sigma_dual");
    return sigma_dual(arc_basis(Rs, Rt, k0), beta);
}

/// gamma_{s,t} for a pose pair with interval enforcement.  Central identity:
///   R_s h(gamma_{s,t}(beta)) = R_t h(gamma_{t,s}(-beta)) = sigma_{s,t}(beta).
inline Vec2 gamma(const Rotation &Rs, const Rotation &Rt, double beta,
                  double k0) {
    detail::require_in_interval(interval_J(Rs, Rt), beta, "gamma");
    return gamma(arc_basis(Rs, Rt, k0), beta);
}

/// gamma*_{s,t} for a pose pair with interval enforcement.  Dual identity:
///   R_s h(gamma*_{s,t}(beta)) = -R_t h(gamma*_{t,s}(beta)) = sigma*_{s,t}(beta).
inline Vec2 gamma_dual(const Rotation &Rs, const Rotation &Rt, double beta,
                       double k0) {
    detail::require_in_interval(interval_J_dual(Rs, Rt), beta, "gamma_dual");
    return gamma_dual(arc_basis(Rs, Rt, k0), beta);
}

// =============================================================================
// Euler-angle forms of the in-plane arcs
// =============================================================================

namespace detail {

/// gamma as a raw trigonometric formula in the relative Euler angles
/// (phi, theta), defined for all real arguments (no domain checks):
///   (k0/2) sin(theta)(cos beta - 1)(cos phi, sin phi)
///   + k0 cos(theta/2) sin(beta)(-sin phi, cos phi).
inline Vec2 gamma_euler_raw(double phi, double theta, double beta, double k0) {
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double radial = 0.5 * k0 * std::sin(theta) * (std::cos(beta) - 1.0);
    const double tangential = k0 * std::cos(0.5 * theta) * std::sin(beta);
    return {radial * cp - tangential * sp, radial * sp + tangential * cp};
}

/// gamma* raw formula:
///   -(k0/2) sin(theta)(cos beta - 1)(cos phi, sin phi)
///   - k0 sin(theta/2) sin(beta)(-sin phi, cos phi).
inline Vec2 gamma_dual_euler_raw(double phi, double theta, double beta,
                                 double k0) {
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double radial = -0.5 * k0 * std::sin(theta) * (std::cos(beta) - 1.0);
    const double tangential = -k0 * std::sin(0.5 * theta) * std::sin(beta);
    return {radial * cp - tangential * sp, radial * sp + tangential * cp};
}

inline void require_theta_interior(double theta, const char *what) {
    if (!(theta > 0.0 && theta < pi)) {
        throw DegenerateInputError(std::string(what) +
                                   ": theta must lie in (0, pi)");
    }
}

} // namespace detail

/// Primal in-plane arc expressed through the relative Euler angles: equals
/// gamma(Rs, Rt, beta, k0) whenever (phi, theta, psi) are the z-y-z Euler
/// angles of Rs^T Rt.  Requires theta in (0, pi).
inline Vec2 gamma_euler(double phi, double theta, double beta, double k0) {
    detail::require_theta_interior(theta, "gamma_euler");
    return detail::gamma_euler_raw(phi, theta, beta, k0);
}

/// Dual in-plane arc in Euler form; same domain requirement.
inline Vec2 gamma_dual_euler(double phi, double theta, double beta, double k0) {
    detail::require_theta_interior(theta, "gamma_dual_euler");
    return detail::gamma_dual_euler_raw(phi, theta, beta, k0);
}

// =============================================================================
// Arc parameter sampling
// =============================================================================

/// Default number of beta samples per half-interval used by the estimators
/// (grid of 2*64 + 1 nodes on [-pi/2, pi/2]).
inline constexpr int default_n_beta = 64;

/// Symmetric uniform grid on [-pi/2, pi/2] with 2*n_beta + 1 nodes,
/// beta_l = l * (pi/2)/n_beta for l = -n_beta .. n_beta.  Contains -beta for
/// every beta and the exact midpoint 0; every node is valid for every
/// non-degenerate pose pair.
inline std::vector<double> beta_grid(int n_beta) {
    if (n_beta < 1) {
        throw ConfigError("beta_grid: need n_beta >= 1");
    }
    std::vector<double> b;
    b.reserve(2 * n_beta + 1);
    for (int l = -n_beta; l <= n_beta; ++l) {
        b.push_back(l * (0.5 * pi) / n_beta);
    }
    return b;
}

} // namespace odt
