// odtmotion: rigid-motion estimation for optical diffraction tomography
// Stereographic reformulation: the chart tau(k) = k0 k / (k0 - kappa(k))
// maps the punctured data disk onto the exterior ||y|| > k0 and straightens
// every in-plane arc into a line,
//   tau(gamma^{phi,theta}(beta))  = -b w1 + xi(beta) w2,      b = k0 tan(theta/2),
//   tau(gamma*^{phi,theta}(beta)) = (k0^2/b) w1 + s(beta) w2,
// with w1 = (cos phi, sin phi), w2 = rot90(w1).  Matching straight-line
// profiles of the transformed data gives an independent route to the
// relative rotation, and the infinitesimal relation becomes exactly affine
// in the radius:  d/dt nu~(r, phi_w) = (k0 rho + r zeta) (1/r) d/dphi nu~.
#pragma once

#include <odt/arcs.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/geometry.hpp>
#include <odt/nelder_mead.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>
#include <odt/types.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace odt {

// =============================================================================
// The chart and its inverse
// =============================================================================

/// Stereographic chart tau(k) = k0 k / (k0 - kappa(k)); requires
/// 0 < ||k|| < k0 and satisfies ||tau(k)|| > k0 with the rim as fixed set.
inline Vec2 tau(const Vec2 &k, double k0) {
    const double r = k.norm();
    if (!(r > 0.0) || !(r < k0)) {
        throw OutOfDiskError("tau: need 0 < ||k|| < k0");
    }
    return k0 / (k0 - kappa(k, k0)) * k;
}

/// Inverse chart tau_inv(y) = 2 k0^2 y / (k0^2 + ||y||^2); requires
/// ||y|| > k0.
inline Vec2 tau_inv(const Vec2 &y, double k0) {
    const double r = y.norm();
    if (!(r > k0)) {
        throw OutOfDiskError("tau_inv: need ||y|| > k0");
    }
    return 2.0 * k0 * k0 / (k0 * k0 + r * r) * y;
}

namespace detail {

/// Signed-radius forms of the chart: both maps fix the direction, so they
/// act on the signed polar radius alone (odd functions).
inline double tau_radius(double r, double k0) {
    return k0 * r / (k0 - kappa(r, k0));
}

inline double tau_inv_radius(double r, double k0) {
    return 2.0 * k0 * k0 * r / (k0 * k0 + r * r);
}

} // namespace detail

// =============================================================================
// Transformed squared measurement
// =============================================================================

/// Samples of the transformed field nu~(y) = nu(tau_inv(y)) on a polar grid
/// in the chart plane: the requested radii crossed with the full-circle
/// angle set of the source grid.
struct StereoField {
    double k0 = 0.0;
    std::vector<double> radii;  ///< > k0, within the chart image of the cover
    std::vector<double> angles; ///< 4n angles covering [0, 2*pi)
    std::vector<double> values; ///< radii-major layout

    double at(std::size_t i, std::size_t j) const {
        return values[i * angles.size() + j];
    }
};

/// Evaluate the transformed field on target radii (all > k0).  Radii whose
/// preimage leaves the covered disk are rejected: the chart image of the
/// cover is ||y|| >= tau(cover), so usable radii are bounded away from k0.
inline StereoField transform_nu(const NuFrame &frame,
                                const std::vector<double> &target_radii) {
    const PolarGrid &g = frame.grid;
    const PolarInterpolator interp(frame);
    const double min_radius = detail::tau_radius(interp.cover_radius(), g.k0);
    StereoField field;
    field.k0 = g.k0;
    field.radii = target_radii;
    const int na = 2 * g.size();
    field.angles.resize(na);
    for (int j = 0; j < na; ++j) {
        field.angles[j] = j * g.angular_step();
    }
    field.values.reserve(target_radii.size() * na);
    for (const double rho : target_radii) {
        if (!(rho > g.k0) || rho < min_radius) {
            throw OutOfDiskError(
                "transform_nu: target radius outside the chart image of the "
                "covered disk");
        }
        const double r_k = detail::tau_inv_radius(rho, g.k0);
        for (int j = 0; j < na; ++j) {
            const std::optional<double> v = interp.at_polar(r_k, field.angles[j]);
            field.values.push_back(v ? *v : 0.0);
        }
    }
    return field;
}

// =============================================================================
// Straight-line geometry of the transformed arcs
// =============================================================================

/// The two lines one frame contributes for a relative rotation with Euler
/// angles (phi, theta, psi): in the s-frame chart plane the primal arc maps
/// into the line through -b w1_s with direction rot90(w1_s), the dual arc
/// into the line through (k0^2/b) w1_s; the t-frame lines use w1_t, which
/// sits at the angle pi - psi.
struct LinePair {
    double b = 0.0; ///< primal offset magnitude k0 tan(theta/2), > 0
    Vec2 w1_s, w1_t;
};

/// Line pair of a relative rotation; requires theta in (0, pi).
inline LinePair line_from_euler(const EulerZYZ &e, double k0) {
    if (!(e.theta > 0.0 && e.theta < pi)) {
        throw DegenerateInputError("line_from_euler: theta must be in (0, pi)");
    }
    LinePair lines;
    lines.b = k0 * std::tan(0.5 * e.theta);
    lines.w1_s = {std::cos(e.phi), std::sin(e.phi)};
    lines.w1_t = {std::cos(pi - e.psi), std::sin(pi - e.psi)};
    return lines;
}

/// Maximum distance of the points from their total-least-squares line fit
/// (centroid plus dominant direction of the centered cloud).
inline double collinearity_check(const std::vector<Vec2> &points) {
    if (points.size() < 3) {
        return 0.0;
    }
    Vec2 centroid = Vec2::Zero();
    for (const Vec2 &p : points) {
        centroid += p;
    }
    centroid /= static_cast<double>(points.size());
    Mat2 scatter = Mat2::Zero();
    for (const Vec2 &p : points) {
        const Vec2 d = p - centroid;
        scatter += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(scatter);
    const Vec2 normal = eig.eigenvectors().col(0); // smallest eigenvalue
    double worst = 0.0;
    for (const Vec2 &p : points) {
        worst = std::max(worst, std::abs(normal.dot(p - centroid)));
    }
    return worst;
}

// =============================================================================
// Rotation estimation by line-profile matching
// =============================================================================

namespace detail {

/// Signed line parameters xi(beta) at which the transformed primal and dual
/// arcs are sampled.  Derived from a symmetric beta set (excluding 0, where
/// the lines run to infinity); along the primal line
///   xi(beta) = a sin(beta) / (C (1 - cos beta)),  C = cos^2(theta/2),
/// and along the dual line s(beta) = -a* sin(beta)/(S (1 - cos beta)).
struct StereoSamples {
    std::vector<double> betas; ///< nonzero, symmetric
    std::vector<double> xi_primal;
    std::vector<double> xi_dual;
};

inline StereoSamples stereo_samples(double theta, double k0, int n_prof) {
    StereoSamples out;
    const double C = std::cos(0.5 * theta) * std::cos(0.5 * theta);
    const double S = 1.0 - C;
    const double a = k0 * std::cos(0.5 * theta);
    const double a_star = k0 * std::sin(0.5 * theta);
    out.betas.reserve(2 * n_prof);
    out.xi_primal.reserve(2 * n_prof);
    out.xi_dual.reserve(2 * n_prof);
    for (int l = -n_prof; l <= n_prof; ++l) {
        if (l == 0) {
            continue;
        }
        const double beta = l * (0.5 * pi) / n_prof;
        out.betas.push_back(beta);
        const double denom = 1.0 - std::cos(beta);
        out.xi_primal.push_back(a * std::sin(beta) / (C * denom));
        out.xi_dual.push_back(-a_star * std::sin(beta) / (S * denom));
    }
    return out;
}

/// Transformed-field value on a chart line: y = offset * w1 + xi * rot90(w1).
inline std::optional<double> line_value(const PolarInterpolator &interp,
                                        const Vec2 &w1, double offset,
                                        double xi, double k0) {
    const Vec2 w2(-w1.y(), w1.x());
    const Vec2 y = offset * w1 + xi * w2;
    return interp.at(tau_inv(y, k0));
}

/// Mean squared profile mismatch of the candidate (theta, alpha_s, alpha_t):
/// primal profiles match in opposite orientation (beta against -beta), dual
/// profiles in the same orientation.  +infinity when no sample pair is
/// valid.
inline double stereo_energy(const PolarInterpolator &interp_s,
                            const PolarInterpolator &interp_t, double theta,
                            double alpha_s, double alpha_t,
                            const StereoSamples &samples) {
    const double k0 = interp_s.grid().k0;
    const double b = k0 * std::tan(0.5 * theta);
    const double dual_offset = k0 * k0 / b;
    const Vec2 w1_s(std::cos(alpha_s), std::sin(alpha_s));
    const Vec2 w1_t(std::cos(alpha_t), std::sin(alpha_t));
    const std::size_t m = samples.betas.size();
    double sum = 0.0;
    int valid = 0;
    for (std::size_t l = 0; l < m; ++l) {
        const std::size_t rev = m - 1 - l; // index of -beta
        {
            const std::optional<double> vs = line_value(
                interp_s, w1_s, -b, samples.xi_primal[l], k0);
            const std::optional<double> vt = line_value(
                interp_t, w1_t, -b, samples.xi_primal[rev], k0);
            if (vs && vt) {
                const double d = *vs - *vt;
                sum += d * d;
                ++valid;
            }
        }
        {
            const std::optional<double> vs = line_value(
                interp_s, w1_s, dual_offset, samples.xi_dual[l], k0);
            const std::optional<double> vt = line_value(
                interp_t, w1_t, dual_offset, samples.xi_dual[l], k0);
            if (vs && vt) {
                const double d = *vs - *vt;
                sum += d * d;
                ++valid;
            }
        }
    }
    if (valid == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return sum / valid;
}

} // namespace detail

/// Relative rotation Rs^T Rt by straight-line matching in the chart plane.
///
/// A coarse scan over 64 cell-centered theta values and 64 x 64 line
/// directions (alpha_s, alpha_t) locates the best-matching line pair using
/// per-frame profile tables; coordinate-wise golden-section refinement then
/// polishes (theta, alpha_s, alpha_t).  The rotation follows as
/// Qz(alpha_s) Qy(theta) Qz(pi - alpha_t).
inline Rotation estimate_rotation_stereo(const PolarInterpolator &interp_s,
                                         const PolarInterpolator &interp_t,
                                         int n_theta = 64, int n_alpha = 64,
                                         int n_prof = 24) {
    const double k0 = interp_s.grid().k0;
    double best_energy = std::numeric_limits<double>::infinity();
    double best_theta = 0.5 * pi, best_as = 0.0, best_at = 0.0;

    std::vector<double> profile_s, profile_t;
    for (int c = 0; c < n_theta; ++c) {
        const double theta = (c + 0.5) * pi / n_theta;
        const detail::StereoSamples samples =
            detail::stereo_samples(theta, k0, n_prof);
        const double b = k0 * std::tan(0.5 * theta);
        const double dual_offset = k0 * k0 / b;
        const std::size_t m = samples.betas.size();

        // Per-frame profile tables over all scan directions; invalid
        // samples are tagged NaN and excluded pairwise below.
        const auto build = [&](const PolarInterpolator &interp,
                               std::vector<double> &table) {
            table.assign(static_cast<std::size_t>(n_alpha) * 2 * m, 0.0);
            for (int a = 0; a < n_alpha; ++a) {
                const double alpha = a * two_pi / n_alpha;
                const Vec2 w1(std::cos(alpha), std::sin(alpha));
                for (std::size_t l = 0; l < m; ++l) {
                    const std::optional<double> vp = detail::line_value(
                        interp, w1, -b, samples.xi_primal[l], k0);
                    const std::optional<double> vd = detail::line_value(
                        interp, w1, dual_offset, samples.xi_dual[l], k0);
                    const std::size_t at = (static_cast<std::size_t>(a) * m + l) * 2;
                    table[at] =
                        vp ? *vp : std::numeric_limits<double>::quiet_NaN();
                    table[at + 1] =
                        vd ? *vd : std::numeric_limits<double>::quiet_NaN();
                }
            }
        };
        build(interp_s, profile_s);
        build(interp_t, profile_t);

        for (int as = 0; as < n_alpha; ++as) {
            for (int at = 0; at < n_alpha; ++at) {
                double sum = 0.0;
                int valid = 0;
                for (std::size_t l = 0; l < m; ++l) {
                    const std::size_t rev = m - 1 - l;
                    const std::size_t is = (static_cast<std::size_t>(as) * m + l) * 2;
                    const std::size_t itp =
                        (static_cast<std::size_t>(at) * m + rev) * 2;
                    const std::size_t itd =
                        (static_cast<std::size_t>(at) * m + l) * 2;
                    const double dp = profile_s[is] - profile_t[itp];
                    if (!std::isnan(dp)) {
                        sum += dp * dp;
                        ++valid;
                    }
                    const double dd = profile_s[is + 1] - profile_t[itd + 1];
                    if (!std::isnan(dd)) {
                        sum += dd * dd;
                        ++valid;
                    }
                }
                if (valid > 0 && sum / valid < best_energy) {
                    best_energy = sum / valid;
                    best_theta = theta;
                    best_as = as * two_pi / n_alpha;
                    best_at = at * two_pi / n_alpha;
                }
            }
        }
    }
    if (!std::isfinite(best_energy)) {
        throw AmbiguityError(
            "estimate_rotation_stereo: no valid line-profile samples");
    }

    // Coordinate-wise golden refinement of (theta, alpha_s, alpha_t) around
    // the coarse minimum.
    const double dtheta = pi / n_theta;
    const double dalpha = two_pi / n_alpha;
    for (int round = 0; round < 3; ++round) {
        best_theta = detail::golden_minimize(
            [&](double th) {
                const double clamped = std::clamp(th, 1e-4, pi - 1e-4);
                return detail::stereo_energy(
                    interp_s, interp_t, clamped, best_as, best_at,
                    detail::stereo_samples(clamped, k0, n_prof));
            },
            best_theta - dtheta, best_theta + dtheta);
        best_theta = std::clamp(best_theta, 1e-4, pi - 1e-4);
        const detail::StereoSamples samples =
            detail::stereo_samples(best_theta, k0, n_prof);
        best_as = detail::golden_minimize(
            [&](double as) {
                return detail::stereo_energy(interp_s, interp_t, best_theta,
                                             as, best_at, samples);
            },
            best_as - dalpha, best_as + dalpha);
        best_at = detail::golden_minimize(
            [&](double at) {
                return detail::stereo_energy(interp_s, interp_t, best_theta,
                                             best_as, at, samples);
            },
            best_at - dalpha, best_at + dalpha);
    }

    return euler_to_rotation({best_as, best_theta, pi - best_at});
}

inline Rotation estimate_rotation_stereo(const NuFrame &nu_s,
                                         const NuFrame &nu_t) {
    if (!(nu_s.grid == nu_t.grid)) {
        throw ConfigError(
            "estimate_rotation_stereo: frames must share a grid");
    }
    return estimate_rotation_stereo(PolarInterpolator(nu_s),
                                    PolarInterpolator(nu_t));
}

// =============================================================================
// Infinitesimal relation in the chart plane
// =============================================================================

/// Residual of the transformed infinitesimal relation
///   d/dt nu~(r, phi_w) = (k0 rho + r zeta) (1/r) d/dphi nu~(r, phi_w)
/// at the given omega, over chart radii |r| > k0.  The time derivative is a
/// central difference of the bracketing frames; the angular derivative
/// comes from the middle frame's spline jet.  Returns the max absolute
/// mismatch divided by the max magnitude of either side (0 when everything
/// vanishes).
inline double check_inf_relation_stereo(const NuFrame &prev,
                                        const NuFrame &mid,
                                        const NuFrame &next,
                                        const AngularVelocity &omega,
                                        const std::vector<double> &radii) {
    if (!(prev.grid == mid.grid) || !(mid.grid == next.grid)) {
        throw ConfigError("check_inf_relation_stereo: frames must share a grid");
    }
    const double k0 = mid.grid.k0;
    const double dt = next.time - prev.time;
    if (!(dt > 0.0)) {
        throw ConfigError(
            "check_inf_relation_stereo: frame times must be increasing");
    }
    const PolarInterpolator ip(prev), im(mid), in_(next);
    const double min_radius = detail::tau_radius(im.cover_radius(), k0);
    double worst = 0.0, scale = 0.0;
    for (const double r : radii) {
        if (!(std::abs(r) > k0)) {
            throw OutOfDiskError(
                "check_inf_relation_stereo: chart radii must satisfy |r| > k0");
        }
        if (std::abs(r) < min_radius) {
            throw OutOfDiskError(
                "check_inf_relation_stereo: radius maps outside the covered "
                "disk");
        }
        const double r_k = detail::tau_inv_radius(r, k0);
        const std::optional<double> vp = ip.at_polar(r_k, omega.phi);
        const std::optional<double> vn = in_.at_polar(r_k, omega.phi);
        const std::optional<PolarInterpolator::Jet> jet =
            im.jet_polar(r_k, omega.phi);
        if (!vp || !vn || !jet) {
            throw OutOfDiskError(
                "check_inf_relation_stereo: sample left the covered disk");
        }
        const double lhs = (*vn - *vp) / dt;
        const double rhs = (k0 * omega.rho + r * omega.zeta) / r * jet->dphi;
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
    }
    if (scale == 0.0) {
        return 0.0;
    }
    return worst / scale;
}

} // namespace odt
