// odtmotion: rigid-motion estimation for optical diffraction tomography
// Detection of degenerate pose pairs.  When the pose axes are (anti-)aligned
// the common circles collapse and the squared measurements are related by an
// in-plane rotation alone:
//   plain      (R_t = R_s Qz(alpha)):        nu_s(Q(alpha) k) = nu_t(k),
//   reflected  (R_t = R_s Qy(pi) Qz(alpha)): nu_s(S Q(alpha) k) = nu_t(k),
// with S = diag(1, -1).  The detector scans alpha over the angular grid,
// refines the best candidate continuously, and reports the branch whose
// residual is far below the frame magnitude.
#pragma once

#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/nelder_mead.hpp>
#include <odt/spline.hpp>
#include <odt/types.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace odt {

/// Result of degenerate-pair detection: nu_t(k) = nu_s(Q(alpha) k) when not
/// reflected, nu_t(k) = nu_s(S Q(alpha) k) when reflected.
struct DegenerateAlignment {
    double alpha = 0.0; ///< in-plane rotation angle in [0, 2*pi)
    bool reflected = false;
};

namespace detail {

/// RMS mismatch of one alignment branch at a continuous angle, evaluated at
/// every grid node of nu_t against the interpolated nu_s.
inline double alignment_rms(const PolarInterpolator &interp_s,
                            const NuFrame &nu_t, double alpha, bool reflected) {
    const PolarGrid &g = nu_t.grid;
    const int m = g.size();
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double phi =
                reflected ? -(g.angles[j] + alpha) : g.angles[j] + alpha;
            const std::optional<double> v = interp_s.at_polar(g.radii[i], phi);
            const double diff = (v ? *v : 0.0) - nu_t.at(i, j);
            sum += diff * diff;
        }
    }
    return std::sqrt(sum / (static_cast<double>(m) * m));
}

/// Exact node-permutation RMS at alpha = shift * angular_step: rotating a
/// node by a whole number of angular steps lands on another (extended) node,
/// so no interpolation is involved in the coarse scan.
inline double alignment_rms_shift(const PolarInterpolator &interp_s,
                                  const NuFrame &nu_t, int shift,
                                  bool reflected) {
    const PolarGrid &g = nu_t.grid;
    const int m = g.size();
    const int na = 2 * m;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const int je = reflected ? ((-(j + shift)) % na + na) % na
                                     : (j + shift) % na;
            const double diff = interp_s.value_node(i, je) - nu_t.at(i, j);
            sum += diff * diff;
        }
    }
    return std::sqrt(sum / (static_cast<double>(m) * m));
}

} // namespace detail

/// Detect whether two squared-measurement frames come from a degenerate pose
/// pair (axes aligned or anti-aligned).  Scans the in-plane angle over the
/// angular grid for both branches, refines the best candidates continuously,
/// and fires when the refined RMS mismatch drops below 1e-3 times the frame
/// RMS.  Returns std::nullopt for generic (tilted-axis) pairs.
///
/// Throws AmbiguityError when both branches match — a reflection-symmetric
/// object cannot distinguish them — and ConfigError when the grids differ.
inline std::optional<DegenerateAlignment>
detect_degenerate(const NuFrame &nu_s, const NuFrame &nu_t) {
    if (!(nu_s.grid == nu_t.grid)) {
        throw ConfigError("detect_degenerate: frames must share a grid");
    }
    const PolarGrid &g = nu_t.grid;
    const int na = 2 * g.size();
    const double dphi = g.angular_step();

    double scale = 0.0;
    for (const double v : nu_s.values) {
        scale += v * v;
    }
    for (const double v : nu_t.values) {
        scale += v * v;
    }
    scale = std::sqrt(scale / static_cast<double>(nu_s.values.size() +
                                                  nu_t.values.size()));
    if (scale == 0.0) {
        throw AmbiguityError("detect_degenerate: frames are identically zero");
    }
    const double tol_deg = 1e-3 * scale;

    const PolarInterpolator interp_s(nu_s);
    double best_rms[2] = {0.0, 0.0};
    double best_alpha[2] = {0.0, 0.0};
    for (const bool reflected : {false, true}) {
        int best_shift = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int shift = 0; shift < na; ++shift) {
            const double rms =
                detail::alignment_rms_shift(interp_s, nu_t, shift, reflected);
            if (rms < best) {
                best = rms;
                best_shift = shift;
            }
        }
        // The coarse minimum brackets the continuous one within one grid
        // step on either side; refine to sub-cell accuracy so the tolerance
        // can fire for off-grid angles as well.
        const double center = best_shift * dphi;
        const double alpha = detail::golden_minimize(
            [&](double al) {
                return detail::alignment_rms(interp_s, nu_t, al, reflected);
            },
            center - dphi, center + dphi);
        const int idx = reflected ? 1 : 0;
        best_alpha[idx] = wrap_two_pi(alpha);
        best_rms[idx] = detail::alignment_rms(interp_s, nu_t, alpha, reflected);
    }

    const bool plain_hit = best_rms[0] < tol_deg;
    const bool reflected_hit = best_rms[1] < tol_deg;
    if (plain_hit && reflected_hit) {
        throw AmbiguityError(
            "detect_degenerate: both alignment branches match; the object is "
            "too symmetric to fix the in-plane angle");
    }
    if (plain_hit) {
        return DegenerateAlignment{best_alpha[0], false};
    }
    if (reflected_hit) {
        return DegenerateAlignment{best_alpha[1], true};
    }
    return std::nullopt;
}

} // namespace odt
