// odtmotion: rigid-motion estimation for optical diffraction tomography
// Direct rotation estimation from a frame pair: detect and handle degenerate
// (collinear-axis) alignments, otherwise minimize the common-circle energy
// by coarse grid search plus simplex refinement.  The result is the relative
// rotation Rs^T Rt; absolute poses follow by chaining from a reference frame.
#pragma once

#include <odt/detect.hpp>
#include <odt/energy.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>

#include <limits>
#include <optional>
#include <vector>

namespace odt {

/// Relative rotation Rs^T Rt from interpolators of the two squared frames.
///
/// Degenerate alignments (detected from the data) are returned directly as
/// Qz(alpha), or Qy(pi) Qz(alpha) for the reflected branch.  Otherwise the
/// energy is minimized by simplex refinement: from `init` when given, else
/// from each of the well-separated low-energy candidates of the standard
/// 16x8x16 coarse grid, keeping the lowest refined energy.  The multi-start
/// fallback matters because the basin around the truth is narrower than the
/// coarse spacing, so the single best grid node is sometimes a spurious
/// basin; refined energies separate truth from impostors by many orders of
/// magnitude.  AmbiguityError propagates from the degeneracy check when the
/// data are too symmetric.
inline Rotation estimate_rotation_direct(const NuFrame &nu_ref,
                                         const NuFrame &nu_t,
                                         const PolarInterpolator &interp_ref,
                                         const PolarInterpolator &interp_t,
                                         std::optional<EulerZYZ> init = {},
                                         int n_beta = default_n_beta) {
    const std::optional<DegenerateAlignment> deg =
        detect_degenerate(nu_ref, nu_t);
    if (deg) {
        const Rotation Rz = axis_rotation_z(deg->alpha);
        return deg->reflected ? Rotation(axis_rotation_y(pi) * Rz) : Rz;
    }
    const auto objective = [&](const EulerZYZ &e) {
        return energy(interp_ref, interp_t, e, n_beta).energy;
    };
    if (init) {
        return euler_to_rotation(nelder_mead_refine(objective, *init));
    }
    const std::vector<EnergyEvaluation> starts = grid_search_candidates(
        interp_ref, interp_t, standard_euler_grid(), n_beta);
    EulerZYZ best{};
    double best_energy = std::numeric_limits<double>::infinity();
    for (const EnergyEvaluation &s : starts) {
        const EulerZYZ refined = nelder_mead_refine(objective, s.euler);
        const double e = objective(refined);
        if (e < best_energy) {
            best_energy = e;
            best = refined;
        }
    }
    return euler_to_rotation(best);
}

/// Convenience overload building the interpolators internally.
inline Rotation estimate_rotation_direct(const NuFrame &nu_ref,
                                         const NuFrame &nu_t,
                                         std::optional<EulerZYZ> init = {},
                                         int n_beta = default_n_beta) {
    if (!(nu_ref.grid == nu_t.grid)) {
        throw ConfigError(
            "estimate_rotation_direct: frames must share a grid");
    }
    return estimate_rotation_direct(nu_ref, nu_t, PolarInterpolator(nu_ref),
                                    PolarInterpolator(nu_t), init, n_beta);
}

} // namespace odt
