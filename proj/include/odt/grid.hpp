// odtmotion: rigid-motion estimation for optical diffraction tomography
// Signed-radius polar sampling of the measurement disk: 2n radii symmetric
// about 0 and 2n angles in [0, pi) cover each disk point exactly once via
// the identification (r, phi + pi) == (-r, phi).
#pragma once

#include <odt/errors.hpp>
#include <odt/types.hpp>

#include <cmath>
#include <vector>

namespace odt {

/// Canonical signed-polar coordinates: radius of either sign, angle in
/// [0, pi).  reduce() folds an arbitrary (r, phi) into this chart.
struct SignedPolar {
    double r = 0.0;
    double phi = 0.0;
};

/// Fold (r, phi) into the chart r signed, phi in [0, pi), using
/// (r, phi + pi) == (-r, phi).
inline SignedPolar reduce_signed_polar(double r, double phi) {
    double a = std::fmod(phi, two_pi);
    if (a < 0.0) {
        a += two_pi;
    }
    if (a >= pi) {
        return {-r, a - pi};
    }
    return {r, a};
}

/// Signed-polar chart coordinates of a Cartesian point.
inline SignedPolar to_signed_polar(const Vec2 &p) {
    return reduce_signed_polar(p.norm(), std::atan2(p.y(), p.x()));
}

/// Polar sampling grid for frames of Fourier-domain data.
///
/// Radii r_i = (i - n + 1/2) * k0/n for i = 0..2n-1: 2n signed values in
/// (-k0, k0), symmetric about 0 (r_i = -r_{2n-1-i}), uniformly spaced, and
/// excluding both 0 and the rim.  Angles phi_j = j * pi/(2n) for
/// j = 0..2n-1.  Values on a frame are stored row-major as
/// values[i * 2n + j] (radius-major).
struct PolarGrid {
    double k0 = two_pi;
    int n = 0;
    std::vector<double> radii;  ///< size 2n, strictly increasing
    std::vector<double> angles; ///< size 2n, uniform in [0, pi)

    /// Build the standard grid for a given disk radius and resolution.
    static PolarGrid standard(double k0, int n) {
        if (!(k0 > 0.0) || n < 2) {
            throw ConfigError("PolarGrid: need k0 > 0 and n >= 2");
        }
        PolarGrid g;
        g.k0 = k0;
        g.n = n;
        g.radii.resize(2 * n);
        g.angles.resize(2 * n);
        const double dr = k0 / n;
        const double dphi = pi / (2.0 * n);
        for (int i = 0; i < 2 * n; ++i) {
            g.radii[i] = (i - n + 0.5) * dr;
            g.angles[i] = i * dphi;
        }
        return g;
    }

    int size() const { return 2 * n; }
    double radial_step() const { return k0 / n; }
    double angular_step() const { return pi / (2.0 * n); }

    /// Index of the radius -r_i.
    int flip_radius(int i) const { return 2 * n - 1 - i; }

    /// Cartesian position of node (i, j).
    Vec2 node(int i, int j) const {
        return {radii[i] * std::cos(angles[j]), radii[i] * std::sin(angles[j])};
    }

    /// Flat storage index of node (i, j).
    int flat(int i, int j) const { return i * 2 * n + j; }

    /// Largest radius represented on the grid, k0 * (1 - 1/(2n)).
    double max_radius() const { return radii.back(); }

    bool operator==(const PolarGrid &other) const {
        return k0 == other.k0 && n == other.n && radii == other.radii &&
               angles == other.angles;
    }
};

} // namespace odt
