// odtmotion: rigid-motion estimation for optical diffraction tomography
// SO(3) kinematics: z-y-z Euler angles, angular velocity in cylindrical
// coordinates, Rodrigues exponential, polar/Cayley retractions, and the
// retraction-based forward-Euler integrator for R'(t) = R(t) hat(omega(t)).
#pragma once

#include <odt/errors.hpp>
#include <odt/types.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace odt {

// =============================================================================
// Parameter types
// =============================================================================

/// z-y-z Euler angles: R = Qz(phi) * Qy(theta) * Qz(psi).
///
/// Canonical ranges are phi, psi in [0, 2*pi) and theta in [0, pi]; at the
/// gimbal configurations theta in {0, pi} only phi + psi (resp. phi - psi)
/// matters and the canonical representative fixes psi = 0.
struct EulerZYZ {
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
};

/// Angular velocity omega in signed cylindrical coordinates:
///   omega = (rho * cos(phi), rho * sin(phi), zeta)
/// with the in-plane direction phi restricted to [0, pi) and rho carrying
/// the sign.  Every omega has exactly one such representation (rho = 0,
/// phi = 0 for a purely axial velocity).
struct AngularVelocity {
    double rho = 0.0;
    double phi = 0.0;
    double zeta = 0.0;

    /// Cartesian components (rho*cos(phi), rho*sin(phi), zeta).
    Vec3 cartesian() const {
        return {rho * std::cos(phi), rho * std::sin(phi), zeta};
    }

    /// Decompose a Cartesian vector into the signed cylindrical form.
    static AngularVelocity from_cartesian(const Vec3 &w) {
        AngularVelocity out;
        out.zeta = w.z();
        const double r = std::hypot(w.x(), w.y());
        if (r == 0.0) {
            return out;
        }
        double phi = std::atan2(w.y(), w.x()); // (-pi, pi]
        if (phi >= 0.0 && phi < pi) {
            out.rho = r;
            out.phi = phi;
        } else {
            // Fold the lower half-plane (and phi == pi) onto [0, pi) by
            // negating the radius.
            out.rho = -r;
            out.phi = phi < 0.0 ? phi + pi : phi - pi;
        }
        return out;
    }
};

/// Retraction used to project an Euler step back onto SO(3).
enum class Retraction { Polar, Cayley };

// =============================================================================
// Elementary rotations and Euler conversions
// =============================================================================

/// Rotation by `angle` about the y-axis.
inline Rotation axis_rotation_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Rotation R;
    R << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
    return R;
}

/// Rotation by `angle` about the z-axis.
inline Rotation axis_rotation_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Rotation R;
    R << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return R;
}

/// Compose R = Qz(phi) * Qy(theta) * Qz(psi).  Defined for any real angles.
inline Rotation euler_to_rotation(const EulerZYZ &e) {
    return axis_rotation_z(e.phi) * axis_rotation_y(e.theta) *
           axis_rotation_z(e.psi);
}

/// Extract canonical z-y-z Euler angles from a rotation matrix.
///
/// Uses theta = acos(R33).  When |R33| > 1 - 1e-12 the angles are in gimbal
/// lock and the convention psi = 0 is applied:
///   theta ~ 0 :  R ~ Qz(phi + psi), returns (atan2(R21, R11), 0, 0)
///   theta ~ pi:  R ~ Qz(phi) Qy(pi) Qz(psi), returns (atan2(-R21, -R11), pi, 0)
inline EulerZYZ rotation_to_euler(const Rotation &R) {
    constexpr double gimbal_tol = 1.0 - 1e-12;
    EulerZYZ e;
    const double c = std::clamp(R(2, 2), -1.0, 1.0);
    if (c > gimbal_tol) {
        e.theta = 0.0;
        e.psi = 0.0;
        e.phi = wrap_two_pi(std::atan2(R(1, 0), R(0, 0)));
    } else if (c < -gimbal_tol) {
        e.theta = pi;
        e.psi = 0.0;
        e.phi = wrap_two_pi(std::atan2(-R(1, 0), -R(0, 0)));
    } else {
        e.theta = std::acos(c);
        e.phi = wrap_two_pi(std::atan2(R(1, 2), R(0, 2)));
        e.psi = wrap_two_pi(std::atan2(R(2, 1), -R(2, 0)));
    }
    return e;
}

/// Canonical representative of an arbitrary Euler triple (round-trip through
/// the rotation it describes).
inline EulerZYZ canonical_euler(const EulerZYZ &e) {
    return rotation_to_euler(euler_to_rotation(e));
}

// =============================================================================
// Lie-algebra helpers
// =============================================================================

/// Skew-symmetric matrix of w: hat(w) * u = w x u.
inline SkewMatrix hat(const Vec3 &w) {
    SkewMatrix W;
    W << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return W;
}

/// Overload for cylindrical-coordinate angular velocities.
inline SkewMatrix hat(const AngularVelocity &w) { return hat(w.cartesian()); }

/// Rotation by `angle` about the unit vector `axis` (Rodrigues formula):
///   R = I + sin(angle) K + (1 - cos(angle)) K^2,  K = hat(axis).
///
/// Throws DegenerateInputError if `axis` is not unit length (within 1e-9).
inline Rotation rodrigues_exp(const Vec3 &axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9) {
        throw DegenerateInputError("rodrigues_exp: axis must be unit length");
    }
    const SkewMatrix K = hat(axis);
    return Mat3::Identity() + std::sin(angle) * K +
           (1.0 - std::cos(angle)) * (K * K);
}

// =============================================================================
// Retractions onto SO(3)
// =============================================================================

/// Orthogonal polar factor of an invertible matrix A = U P (P symmetric
/// positive definite), computed by the Newton iteration
///   X <- (X + X^{-T}) / 2
/// run to Frobenius increment < 1e-14 (at most 50 iterations).
///
/// Throws DegenerateInputError when det(A) <= 0 or the condition number of A
/// exceeds 1e12 — there the nearest rotation is not well defined.
inline Rotation polar_retract(const Mat3 &A) {
    if (A.determinant() <= 0.0) {
        throw DegenerateInputError(
            "polar_retract: matrix has non-positive determinant");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(A.transpose() * A);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(2);
    if (!(lmin > 0.0) || lmax > 1e24 * lmin) {
        throw DegenerateInputError("polar_retract: matrix is ill-conditioned");
    }
    Mat3 X = A;
    for (int iter = 0; iter < 50; ++iter) {
        const Mat3 next = 0.5 * (X + X.inverse().transpose());
        const double step = (next - X).norm();
        X = next;
        if (step < 1e-14) {
            break;
        }
    }
    return X;
}

/// Cayley step from R along the skew direction Wdt:
///   R * (I - Wdt/2)^{-1} (I + Wdt/2).
/// Exactly orthogonal for any skew-symmetric Wdt (there det(I - Wdt/2) >= 1;
/// the singularity check only fires on non-skew misuse).
inline Rotation cayley_retract(const Rotation &R, const SkewMatrix &Wdt) {
    const Mat3 factor = Mat3::Identity() - 0.5 * Wdt;
    if (std::abs(factor.determinant()) < 1e-12) {
        throw DegenerateInputError("cayley_retract: I - Wdt/2 is singular");
    }
    return R * factor.inverse() * (Mat3::Identity() + 0.5 * Wdt);
}

// =============================================================================
// Forward-Euler integration of R'(t) = R(t) hat(omega(t))
// =============================================================================

/// Integrate a rotation trajectory from body-frame angular-velocity samples.
///
/// One explicit Euler step per interval, projected back onto SO(3):
///   R_{j+1} = retract(R_j, (t_{j+1} - t_j) * hat(omega_j))
/// with omega sampled at the left endpoint.  The scheme is first-order
/// accurate in the step size.
///
/// @param times   strictly increasing sample times (size m >= 1)
/// @param omegas  body-frame angular velocity at each time (size m; the last
///                entry is unused by the stepping but kept for symmetry)
/// @param kind    which retraction projects the step back onto SO(3)
/// @param R0      initial rotation at times[0]
/// @return        rotations at all sample times, starting with R0
inline std::vector<Rotation>
integrate_rotation(const std::vector<double> &times,
                   const std::vector<Vec3> &omegas, Retraction kind,
                   const Rotation &R0 = Mat3::Identity()) {
    if (times.size() != omegas.size() || times.empty()) {
        throw ConfigError("integrate_rotation: times/omegas size mismatch");
    }
    std::vector<Rotation> out;
    out.reserve(times.size());
    out.push_back(R0);
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
        const double dt = times[j + 1] - times[j];
        if (dt <= 0.0) {
            throw ConfigError("integrate_rotation: times must be increasing");
        }
        const Rotation &R = out.back();
        const SkewMatrix Wdt = dt * hat(omegas[j]);
        if (kind == Retraction::Cayley) {
            out.push_back(cayley_retract(R, Wdt));
        } else {
            out.push_back(polar_retract(R + R * Wdt));
        }
    }
    return out;
}

/// Convenience overload for cylindrical-coordinate velocity samples.
inline std::vector<Rotation>
integrate_rotation(const std::vector<double> &times,
                   const std::vector<AngularVelocity> &omegas, Retraction kind,
                   const Rotation &R0 = Mat3::Identity()) {
    std::vector<Vec3> w;
    w.reserve(omegas.size());
    for (const auto &o : omegas) {
        w.push_back(o.cartesian());
    }
    return integrate_rotation(times, w, kind, R0);
}

} // namespace odt
