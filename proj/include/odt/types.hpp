// odtmotion: rigid-motion estimation for optical diffraction tomography
// Common scalar/vector/matrix aliases and small numeric helpers
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

namespace odt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

/// 3x3 rotation matrix (orthonormal, det +1).  Plain matrix alias: validity
/// is a contract of the producing operations, checkable via is_rotation().
using Rotation = Mat3;

/// 3x3 skew-symmetric matrix, as produced by hat().
using SkewMatrix = Mat3;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2*pi).
inline double wrap_two_pi(double angle) {
    double a = std::fmod(angle, two_pi);
    if (a < 0.0) {
        a += two_pi;
    }
    return a == two_pi ? 0.0 : a;
}

/// Reduce an angle to (-pi, pi].
inline double wrap_pi(double angle) {
    double a = std::fmod(angle, two_pi);
    if (a > pi) {
        a -= two_pi;
    } else if (a <= -pi) {
        a += two_pi;
    }
    return a;
}

/// True if R is orthonormal with determinant +1 within tol.
inline bool is_rotation(const Mat3 &R, double tol = 1e-9) {
    return (R.transpose() * R - Mat3::Identity()).norm() < tol &&
           std::abs(R.determinant() - 1.0) < tol;
}

} // namespace odt
