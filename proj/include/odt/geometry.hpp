// odtmotion: rigid-motion estimation for optical diffraction tomography
// Hemisphere chart of the scattering geometry: for a plane wave with wave
// number k0 travelling along e3, the accessible Fourier data of the object
// lies on the hemisphere { h(k) : ||k|| < k0 } of the sphere of radius k0
// centred at -k0*e3.
#pragma once

#include <odt/errors.hpp>
#include <odt/types.hpp>

#include <cmath>

namespace odt {

/// kappa(k) = sqrt(k0^2 - ||k||^2) for a 2D frequency inside the open disk.
///
/// Throws OutOfDiskError when ||k|| >= k0 (evanescent regime).
inline double kappa(const Vec2 &k, double k0) {
    const double s = k0 * k0 - k.squaredNorm();
    if (s <= 0.0) {
        throw OutOfDiskError("kappa: frequency outside the disk ||k|| < k0");
    }
    return std::sqrt(s);
}

/// Scalar overload for a signed radial coordinate r with |r| < k0.
inline double kappa(double r, double k0) {
    const double s = k0 * k0 - r * r;
    if (s <= 0.0) {
        throw OutOfDiskError("kappa: radius outside (-k0, k0)");
    }
    return std::sqrt(s);
}

/// Hemisphere chart h(k) = (k1, k2, kappa(k) - k0).
///
/// Maps the measurement disk onto the lower hemisphere through the origin of
/// the Ewald-type sphere of radius k0 centred at -k0*e3; h(0) = 0.
inline Vec3 h_map(const Vec2 &k, double k0) {
    return {k.x(), k.y(), kappa(k, k0) - k0};
}

} // namespace odt
