// odtmotion: rigid-motion estimation for optical diffraction tomography
// Common-circle matching energy: for a candidate relative rotation given by
// z-y-z Euler angles (phi, theta, psi), the squared measurements of the two
// frames must agree along the matching in-plane arcs,
//   nu_s(gamma^{phi,theta}(beta))  = nu_t(gamma^{pi-psi,theta}(-beta)),
//   nu_s(gamma*^{phi,theta}(beta)) = nu_t(gamma*^{pi-psi,theta}(beta)),
// and the energy is the mean squared mismatch of both families over a
// symmetric beta grid.  Minimizing it recovers Rs^T Rt.
#pragma once

#include <odt/arcs.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/nelder_mead.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>
#include <odt/types.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace odt {

/// Energy value at one Euler triple, with the number of beta samples that
/// landed inside both covered disks (out-of-range samples are skipped, and
/// the sum is normalized by this count so energies stay comparable across
/// theta).
struct EnergyEvaluation {
    EulerZYZ euler;
    double energy = 0.0;
    int n_valid_samples = 0;
};

/// Spline value of a squared-measurement frame at a Cartesian frequency, or
/// nullopt outside the covered disk (callers skip such samples).  Builds a
/// fresh interpolator; estimator loops use the PolarInterpolator overload
/// with a cached instance instead.
inline std::optional<double> interp_nu(const NuFrame &frame,
                                       const Vec2 &point) {
    return PolarInterpolator(frame).at(point);
}

inline std::optional<double> interp_nu(const PolarInterpolator &interp,
                                       const Vec2 &point) {
    return interp.at(point);
}

/// Matching energy from pre-built interpolators.  The arc formulas are used
/// as raw trigonometric expressions, so the Euler triple may lie anywhere in
/// R^3 — required by the simplex refiner, which roams outside the canonical
/// box.  Throws EmptySupportError when every sample is skipped.
inline EnergyEvaluation energy(const PolarInterpolator &interp_s,
                               const PolarInterpolator &interp_t,
                               const EulerZYZ &e, int n_beta) {
    const double k0 = interp_s.grid().k0;
    const std::vector<double> betas = beta_grid(n_beta);
    double sum = 0.0;
    int valid = 0;
    for (const double beta : betas) {
        {
            const Vec2 ps = detail::gamma_euler_raw(e.phi, e.theta, beta, k0);
            const Vec2 pt =
                detail::gamma_euler_raw(pi - e.psi, e.theta, -beta, k0);
            const std::optional<double> vs = interp_s.at(ps);
            const std::optional<double> vt = interp_t.at(pt);
            if (vs && vt) {
                const double d = *vs - *vt;
                sum += d * d;
                ++valid;
            }
        }
        {
            const Vec2 ps =
                detail::gamma_dual_euler_raw(e.phi, e.theta, beta, k0);
            const Vec2 pt =
                detail::gamma_dual_euler_raw(pi - e.psi, e.theta, beta, k0);
            const std::optional<double> vs = interp_s.at(ps);
            const std::optional<double> vt = interp_t.at(pt);
            if (vs && vt) {
                const double d = *vs - *vt;
                sum += d * d;
                ++valid;
            }
        }
    }
    if (valid == 0) {
        throw EmptySupportError(
            "energy: every arc sample left the covered disks");
    }
    return {e, sum / valid, valid};
}

/// Matching energy between two frames at one Euler triple.
inline EnergyEvaluation energy(const NuFrame &nu_s, const NuFrame &nu_t,
                               const EulerZYZ &e, int n_beta) {
    if (!(nu_s.grid == nu_t.grid)) {
        throw ConfigError("energy: frames must share a grid");
    }
    return energy(PolarInterpolator(nu_s), PolarInterpolator(nu_t), e, n_beta);
}

/// Coarse Euler-angle search grid: 16 x 8 x 16 over (phi, theta, psi) in
/// row-major order, theta cell-centered to avoid the degenerate endpoints 0
/// and pi.
inline std::vector<EulerZYZ> standard_euler_grid() {
    std::vector<EulerZYZ> grid;
    grid.reserve(16 * 8 * 16);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 8; ++j) {
            for (int k = 0; k < 16; ++k) {
                grid.push_back({two_pi * i / 16.0, (j + 0.5) * pi / 8.0,
                                two_pi * k / 16.0});
            }
        }
    }
    return grid;
}

/// Evaluate the energy on every grid point and return the minimum; ties are
/// broken by first occurrence in grid order.
inline EnergyEvaluation grid_search(const PolarInterpolator &interp_s,
                                    const PolarInterpolator &interp_t,
                                    const std::vector<EulerZYZ> &euler_grid,
                                    int n_beta) {
    if (euler_grid.empty()) {
        throw ConfigError("grid_search: empty euler grid");
    }
    EnergyEvaluation best;
    bool have = false;
    for (const EulerZYZ &e : euler_grid) {
        const EnergyEvaluation ev = energy(interp_s, interp_t, e, n_beta);
        if (!have || ev.energy < best.energy) {
            best = ev;
            have = true;
        }
    }
    return best;
}

inline EnergyEvaluation grid_search(const NuFrame &nu_s, const NuFrame &nu_t,
                                    const std::vector<EulerZYZ> &euler_grid,
                                    int n_beta) {
    if (!(nu_s.grid == nu_t.grid)) {
        throw ConfigError("grid_search: frames must share a grid");
    }
    return grid_search(PolarInterpolator(nu_s), PolarInterpolator(nu_t),
                       euler_grid, n_beta);
}

/// How many spread-out coarse-grid minima to refine when no initial guess
/// is available, and the minimum rotation (Frobenius) separation between
/// them.  The energy basin around the truth is narrower in phi/psi than the
/// coarse grid spacing, so the grid value at the nearest node is not a
/// reliable ranking; refining a handful of well-separated low-energy
/// candidates and keeping the best refined value is.
inline constexpr int default_refine_candidates = 24;
inline constexpr double refine_separation = 0.75;

/// Evaluate the energy on every grid point and return up to `max_candidates`
/// local representatives in ascending energy order, greedily skipping any
/// point whose rotation lies within `min_separation` (Frobenius) of an
/// already selected one.  The suppression collapses the cluster of grid
/// nodes around each basin to a single representative, so the list covers
/// distinct basins rather than one deep one.
inline std::vector<EnergyEvaluation>
grid_search_candidates(const PolarInterpolator &interp_s,
                       const PolarInterpolator &interp_t,
                       const std::vector<EulerZYZ> &euler_grid, int n_beta,
                       int max_candidates = default_refine_candidates,
                       double min_separation = refine_separation) {
    if (euler_grid.empty()) {
        throw ConfigError("grid_search_candidates: empty euler grid");
    }
    if (max_candidates < 1) {
        throw ConfigError("grid_search_candidates: need max_candidates >= 1");
    }
    std::vector<EnergyEvaluation> all;
    all.reserve(euler_grid.size());
    for (const EulerZYZ &e : euler_grid) {
        all.push_back(energy(interp_s, interp_t, e, n_beta));
    }
    std::sort(all.begin(), all.end(),
              [](const EnergyEvaluation &a, const EnergyEvaluation &b) {
                  return a.energy < b.energy;
              });
    std::vector<EnergyEvaluation> kept;
    std::vector<Rotation> kept_rot;
    for (const EnergyEvaluation &ev : all) {
        if (int(kept.size()) >= max_candidates) {
            break;
        }
        const Rotation r = euler_to_rotation(ev.euler);
        bool masked = false;
        for (const Rotation &k : kept_rot) {
            if ((r - k).norm() < min_separation) {
                masked = true;
                break;
            }
        }
        if (!masked) {
            kept.push_back(ev);
            kept_rot.push_back(r);
        }
    }
    return kept;
}

/// Refine an Euler triple by the downhill simplex method (start simplex
/// init +- 0.05 rad per coordinate, stop at diameter 1e-8 or 200 steps).
/// The returned triple is canonicalized.
template <typename F>
EulerZYZ nelder_mead_refine(F &&objective, const EulerZYZ &init) {
    const auto wrapped = [&](const std::vector<double> &x) {
        return objective(EulerZYZ{x[0], x[1], x[2]});
    };
    const NelderMeadResult res =
        nelder_mead(wrapped, {init.phi, init.theta, init.psi});
    return canonical_euler({res.x[0], res.x[1], res.x[2]});
}

} // namespace odt
