// odtmotion: rigid-motion estimation for optical diffraction tomography
// Infinitesimal rotation estimation: a rigid rotation with body angular
// velocity omega = (rho cos(phi_w), rho sin(phi_w), zeta) ties the time
// derivative of the squared measurement to its angular derivative along the
// ray at angle phi_w:
//   d/dt nu(r, phi_w) = [rho (k0 - kappa(r)) / r + zeta] d/dphi nu(r, phi_w).
// Scanning phi over the grid angles and least-squares fitting (rho, zeta)
// per angle, the fit residual j(phi) dips at phi_w; the minimizing angle and
// its coefficients give omega per time step, and integrating the resulting
// field yields the rotation trajectory.
#pragma once

#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/geometry.hpp>
#include <odt/grid.hpp>
#include <odt/so3.hpp>
#include <odt/types.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace odt {

// =============================================================================
// Discrete derivatives of the squared measurement
// =============================================================================

/// Time derivative of nu per grid node from two bracketing frames:
/// (later - earlier) / (t_later - t_earlier).  Covers both central
/// differences (frames at t - dt and t + dt) and the one-sided ends of a
/// trajectory (adjacent frames).
inline std::vector<double> dt_nu(const NuFrame &earlier, const NuFrame &later) {
    if (!(earlier.grid == later.grid)) {
        throw ConfigError("dt_nu: frames must share a grid");
    }
    const double dt = later.time - earlier.time;
    if (!(dt > 0.0)) {
        throw ConfigError("dt_nu: frame times must be increasing");
    }
    std::vector<double> out(earlier.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (later.values[i] - earlier.values[i]) / dt;
    }
    return out;
}

/// Central time derivative from three consecutive frames at t - dt, t,
/// t + dt.  Requires uniform spacing; the middle frame only fixes the
/// stencil on the trajectory.
inline std::vector<double> dt_nu(const NuFrame &prev, const NuFrame &cur,
                                 const NuFrame &next) {
    const double left = cur.time - prev.time;
    const double right = next.time - cur.time;
    if (!(left > 0.0) || !(right > 0.0) ||
        std::abs(left - right) > 1e-9 * (left + right)) {
        throw ConfigError("dt_nu: need uniform time spacing");
    }
    return dt_nu(prev, next);
}

/// Angular derivative of nu per grid node: central difference in the angle
/// index.  Stepping past the chart boundary phi in [0, pi) wraps through the
/// signed-radius identification (r, phi + pi) == (-r, phi), so the stencil
/// at the first and last angle reaches the flipped radius row without a
/// seam.
inline std::vector<double> dphi_nu(const NuFrame &frame) {
    const PolarGrid &g = frame.grid;
    const int m = g.size();
    if (m < 4) {
        throw ConfigError("dphi_nu: need at least 4 angle samples");
    }
    const double h = g.angular_step();
    std::vector<double> out(frame.values.size());
    const auto ext = [&](int i, int j) {
        if (j >= m) {
            return frame.at(g.flip_radius(i), j - m);
        }
        if (j < 0) {
            return frame.at(g.flip_radius(i), j + m);
        }
        return frame.at(i, j);
    };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            out[g.flat(i, j)] = (ext(i, j + 1) - ext(i, j - 1)) / (2.0 * h);
        }
    }
    return out;
}

// =============================================================================
// Per-angle least-squares fit of (rho, zeta)
// =============================================================================

/// Radial profiles entering the fit at one scan angle:
///   g(r) = d/dt nu(r, phi),
///   p(r) = ((k0 - kappa(r)) / r) * d/dphi nu(r, phi),
///   q(r) = d/dphi nu(r, phi),
/// so the infinitesimal relation reads g = rho * p + zeta * q.  All radii
/// appear in the arrays; rows outside the informative band (|r| < 1e-9 or
/// |r| > 0.995 k0) are zeroed and thus drop out of every inner product.
struct GpqProfile {
    double phi = 0.0;
    std::vector<double> g, p, q;
};

/// Build the fit profiles at the grid angle with index phi_index from
/// precomputed derivative tables (layout of NuFrame::values).
inline GpqProfile gpq(const std::vector<double> &dtnu,
                      const std::vector<double> &dphinu, const PolarGrid &grid,
                      int phi_index) {
    const int m = grid.size();
    if (phi_index < 0 || phi_index >= m) {
        throw ConfigError("gpq: angle index out of range");
    }
    GpqProfile prof;
    prof.phi = grid.angles[phi_index];
    prof.g.resize(m);
    prof.p.resize(m);
    prof.q.resize(m);
    for (int i = 0; i < m; ++i) {
        const double r = grid.radii[i];
        if (std::abs(r) < 1e-9 || std::abs(r) > 0.995 * grid.k0) {
            prof.g[i] = prof.p[i] = prof.q[i] = 0.0;
            continue;
        }
        const std::size_t at = grid.flat(i, phi_index);
        prof.g[i] = dtnu[at];
        prof.q[i] = dphinu[at];
        prof.p[i] = (grid.k0 - kappa(r, grid.k0)) / r * dphinu[at];
    }
    return prof;
}

/// Solution of the per-angle fit.
struct RhoZetaFit {
    double rho = 0.0;
    double zeta = 0.0;
    double residual = 0.0; ///< squared norm of g - rho*p - zeta*q
};

/// Least-squares coefficients of g ~ rho*p + zeta*q via the 2x2 normal
/// equations.  Throws RankDeficientError when p and q are (numerically)
/// collinear — the scan marks such angles invalid.
inline RhoZetaFit solve_rho_zeta(const GpqProfile &prof) {
    double pp = 0.0, qq = 0.0, pq = 0.0, gp = 0.0, gq = 0.0;
    const std::size_t m = prof.g.size();
    for (std::size_t i = 0; i < m; ++i) {
        pp += prof.p[i] * prof.p[i];
        qq += prof.q[i] * prof.q[i];
        pq += prof.p[i] * prof.q[i];
        gp += prof.g[i] * prof.p[i];
        gq += prof.g[i] * prof.q[i];
    }
    const double norm_prod = std::sqrt(pp) * std::sqrt(qq);
    if (!(norm_prod - std::abs(pq) > 1e-12 * norm_prod)) {
        throw RankDeficientError(
            "solve_rho_zeta: profiles p and q are collinear at this angle");
    }
    const double det = pp * qq - pq * pq;
    RhoZetaFit fit;
    fit.rho = (qq * gp - pq * gq) / det;
    fit.zeta = (pp * gq - pq * gp) / det;
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = prof.g[i] - fit.rho * prof.p[i] - fit.zeta * prof.q[i];
        res += d * d;
    }
    fit.residual = res;
    return fit;
}

// =============================================================================
// Angle scan and angular-velocity estimate
// =============================================================================

/// Fit results over all grid angles at one time step.  j_values holds the
/// fit residual per angle (+infinity where the fit was rank-deficient);
/// best_index is the argmin under the tie rule "smallest phi wins".
/// competing_minimum reports a second local minimum that is nearly as deep
/// (residual below twice the best) but at least two cells away — the scan
/// cannot exclude it, so callers may wish to treat the step with care.
struct PhiScan {
    std::vector<double> phis;
    std::vector<double> j_values;
    std::vector<double> rho_hat;
    std::vector<double> zeta_hat;
    int best_index = 0;
    bool competing_minimum = false;
};

namespace detail {

/// Time-derivative table at trajectory index t: central differences in the
/// interior, one-sided at the ends.
inline std::vector<double> dt_nu_at(const std::vector<NuFrame> &frames,
                                    std::size_t t_index) {
    const std::size_t m = frames.size();
    if (m < 2 || t_index >= m) {
        throw ConfigError("dt_nu_at: need >= 2 frames and a valid index");
    }
    if (t_index == 0) {
        return dt_nu(frames[0], frames[1]);
    }
    if (t_index + 1 == m) {
        return dt_nu(frames[m - 2], frames[m - 1]);
    }
    return dt_nu(frames[t_index - 1], frames[t_index + 1]);
}

} // namespace detail

/// Scan all grid angles at one trajectory index: solve the (rho, zeta) fit
/// per angle and record the residual curve j(phi).  Throws AmbiguityError
/// when every angle is rank-deficient (no informative radii anywhere).
inline PhiScan scan_phi(const std::vector<NuFrame> &frames,
                        const PolarGrid &grid, std::size_t t_index) {
    const std::vector<double> dtnu = detail::dt_nu_at(frames, t_index);
    const std::vector<double> dphinu = dphi_nu(frames[t_index]);

    const int m = grid.size();
    PhiScan scan;
    scan.phis = grid.angles;
    scan.j_values.assign(m, std::numeric_limits<double>::infinity());
    scan.rho_hat.assign(m, 0.0);
    scan.zeta_hat.assign(m, 0.0);
    int best = -1;
    for (int l = 0; l < m; ++l) {
        const GpqProfile prof = gpq(dtnu, dphinu, grid, l);
        try {
            const RhoZetaFit fit = solve_rho_zeta(prof);
            scan.j_values[l] = fit.residual;
            scan.rho_hat[l] = fit.rho;
            scan.zeta_hat[l] = fit.zeta;
            if (best < 0 || fit.residual < scan.j_values[best]) {
                best = l;
            }
        } catch (const RankDeficientError &) {
            // angle marked invalid; j stays +infinity
        }
    }
    if (best < 0) {
        throw AmbiguityError(
            "scan_phi: every angle is rank-deficient; the in-plane direction "
            "of omega cannot be identified");
    }
    scan.best_index = best;

    // Flag a second, well-separated dip whose residual is not clearly worse
    // (within a factor 2 of the best).  Irrelevant for near-zero motion,
    // where j is uniformly tiny and omega ~ 0 regardless of the angle.
    const double omega_scale = std::hypot(scan.rho_hat[best],
                                          scan.zeta_hat[best]);
    if (omega_scale > 1e-9) {
        for (int l = 0; l < m; ++l) {
            const int dist = std::min((l - best + m) % m, (best - l + m) % m);
            if (dist >= 2 && std::isfinite(scan.j_values[l]) &&
                scan.j_values[l] < 2.0 * scan.j_values[best]) {
                scan.competing_minimum = true;
                break;
            }
        }
    }
    return scan;
}

/// Angular velocity at one trajectory index: the (rho, zeta) fit at the
/// residual-minimizing scan angle.
inline AngularVelocity estimate_omega(const std::vector<NuFrame> &frames,
                                      const PolarGrid &grid,
                                      std::size_t t_index) {
    const PhiScan scan = scan_phi(frames, grid, t_index);
    const int b = scan.best_index;
    return {scan.rho_hat[b], scan.phis[b], scan.zeta_hat[b]};
}

/// Rotation trajectory from squared measurements alone: estimate omega at
/// every time step, then integrate R' = R hat(omega) with the chosen
/// retraction from R = I at the first sample.
inline std::vector<Rotation>
estimate_rotations_infinitesimal(const std::vector<NuFrame> &frames,
                                 Retraction retraction) {
    if (frames.size() < 3) {
        throw ConfigError(
            "estimate_rotations_infinitesimal: need at least 3 time samples");
    }
    const PolarGrid &grid = frames.front().grid;
    std::vector<double> times(frames.size());
    std::vector<AngularVelocity> omegas(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (!(frames[t].grid == grid)) {
            throw ConfigError(
                "estimate_rotations_infinitesimal: frames must share a grid");
        }
        times[t] = frames[t].time;
        omegas[t] = estimate_omega(frames, grid, t);
    }
    return integrate_rotation(times, omegas, retraction);
}

} // namespace odt
