// odtmotion: rigid-motion estimation for optical diffraction tomography
// Translation recovery with known rotations.  Along the common arcs the
// rotation-dependent factors of the complex measurements cancel, leaving a
// pure phase in x = R_t d_t - R_s d_s:
//   mu_s(gamma_{s,t}(beta)) / mu_t(gamma_{t,s}(-beta))       = e^{i<x, sigma(beta)>},
//   mu_s(gamma*_{s,t}(beta)) / conj(mu_t(gamma*_{t,s}(beta))) = e^{i<x, sigma*(beta)>}.
// Unwrapping the measured phase along beta and solving the stacked linear
// system for x yields d_t.  Degenerate pairs use the whole-disk analog, and
// the first moment of the data at the origin locates the optical center.
#pragma once

#include <odt/arcs.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/geometry.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>
#include <odt/types.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace odt {

// =============================================================================
// Phase unwrapping
// =============================================================================

/// Continuous phase from wrapped samples, anchored at one index: outputs
/// differ from inputs by multiples of 2*pi, successive differences have
/// magnitude <= pi, and the anchor sample is returned unchanged (callers
/// anchor where the true phase is 0).  Unwrapping proceeds outward from the
/// anchor in both directions independently.
inline std::vector<double> phase_unwrap(const std::vector<double> &values,
                                        std::size_t anchor_index = 0) {
    if (values.empty()) {
        return {};
    }
    if (anchor_index >= values.size()) {
        throw ConfigError("phase_unwrap: anchor index out of range");
    }
    std::vector<double> out(values.size());
    out[anchor_index] = values[anchor_index];
    for (std::size_t i = anchor_index + 1; i < values.size(); ++i) {
        out[i] = out[i - 1] + wrap_pi(values[i] - values[i - 1]);
    }
    for (std::size_t i = anchor_index; i-- > 0;) {
        out[i] = out[i + 1] + wrap_pi(values[i] - values[i + 1]);
    }
    return out;
}

// =============================================================================
// Phase systems
// =============================================================================

/// Which relation produced a system's rows.
enum class PhaseSource { Primal, Dual, Degenerate };

/// One linear condition <x, direction> = rhs on x = R_t d_t - R_s d_s.
struct PhaseRow {
    Vec3 direction;
    double rhs = 0.0;
};

/// Stack of phase conditions from one relation family of one frame pair.
struct PhaseSystem {
    std::vector<PhaseRow> rows;
    PhaseSource source = PhaseSource::Primal;
};

namespace detail {

/// Largest contiguous index run containing `anchor` on which valid[] holds.
/// Returns {first, last} inclusive; throws when the anchor itself is invalid.
inline std::pair<std::size_t, std::size_t>
valid_run_around(const std::vector<bool> &valid, std::size_t anchor,
                 const char *what) {
    if (anchor >= valid.size() || !valid[anchor]) {
        throw EmptySupportError(std::string(what) +
                                ": amplitude below floor at the anchor");
    }
    std::size_t lo = anchor, hi = anchor;
    while (lo > 0 && valid[lo - 1]) {
        --lo;
    }
    while (hi + 1 < valid.size() && valid[hi + 1]) {
        ++hi;
    }
    return {lo, hi};
}

} // namespace detail

/// Build the primal and dual phase systems of a non-degenerate frame pair.
///
/// The arc ratio phases are sampled on the symmetric beta grid, restricted
/// to the largest contiguous run around beta = 0 where both interpolated
/// amplitudes exceed the floor (1e-6 times the frame's max node amplitude),
/// then unwrapped from the anchor beta = 0 where the true phase vanishes.
/// Row directions are sigma(beta) / sigma*(beta).
inline std::pair<PhaseSystem, PhaseSystem>
build_phase_system(const MuInterpolator &interp_s,
                   const MuInterpolator &interp_t, double floor_s,
                   double floor_t, const Rotation &Rs, const Rotation &Rt,
                   int n_beta = default_n_beta) {
    const double k0 = interp_s.grid().k0;
    const ArcBasis basis_st = arc_basis(Rs, Rt, k0);
    const ArcBasis basis_ts = arc_basis(Rt, Rs, k0);
    const std::vector<double> betas = beta_grid(n_beta);
    const std::size_t anchor = static_cast<std::size_t>(n_beta); // beta = 0

    std::pair<PhaseSystem, PhaseSystem> out;
    out.first.source = PhaseSource::Primal;
    out.second.source = PhaseSource::Dual;
    for (const bool dual : {false, true}) {
        std::vector<bool> valid(betas.size(), false);
        std::vector<double> raw(betas.size(), 0.0);
        std::vector<Vec3> dirs(betas.size());
        for (std::size_t m = 0; m < betas.size(); ++m) {
            const double beta = betas[m];
            const Vec2 ps = dual ? gamma_dual(basis_st, beta)
                                 : gamma(basis_st, beta);
            const Vec2 pt = dual ? gamma_dual(basis_ts, beta)
                                 : gamma(basis_ts, -beta);
            const std::optional<Complex> vs = interp_s.at(ps);
            const std::optional<Complex> vt = interp_t.at(pt);
            if (!vs || !vt || std::abs(*vs) <= floor_s ||
                std::abs(*vt) <= floor_t) {
                continue;
            }
            const Complex ratio = dual ? *vs / std::conj(*vt) : *vs / *vt;
            valid[m] = true;
            raw[m] = std::arg(ratio);
            dirs[m] = dual ? sigma_dual(basis_st, beta) : sigma(basis_st, beta);
        }
        const auto [lo, hi] = detail::valid_run_around(
            valid, anchor, "build_phase_system");
        const std::vector<double> phases = phase_unwrap(
            std::vector<double>(raw.begin() + lo, raw.begin() + hi + 1),
            anchor - lo);
        PhaseSystem &sys = dual ? out.second : out.first;
        sys.rows.reserve(hi - lo + 1);
        for (std::size_t m = lo; m <= hi; ++m) {
            sys.rows.push_back({dirs[m], phases[m - lo]});
        }
    }
    return out;
}

/// Convenience overload building interpolators and floors from the frames.
inline std::pair<PhaseSystem, PhaseSystem>
build_phase_system(const MuFrame &mu_s, const MuFrame &mu_t, const Rotation &Rs,
                   const Rotation &Rt, int n_beta = default_n_beta) {
    if (!(mu_s.grid == mu_t.grid)) {
        throw ConfigError("build_phase_system: frames must share a grid");
    }
    return build_phase_system(MuInterpolator(mu_s), MuInterpolator(mu_t),
                              1e-6 * max_amplitude(mu_s),
                              1e-6 * max_amplitude(mu_t), Rs, Rt, n_beta);
}

/// Whole-disk phase system of a degenerate pair with known in-plane angle
/// (from detect_degenerate or from given rotations).  Rows relate x to the
/// hemisphere directions Rs h(k) at the s-frame grid nodes:
///   plain:     arg[ mu_s(k) / mu_t(Q(-alpha) k) ]        = <x, Rs h(k)>,
///   reflected: arg[ mu_s(k) / conj(mu_t(Q(-alpha) S k)) ] = <x, Rs h(k)>,
/// with S = diag(1, -1).  Phases are unwrapped per angular ray outward from
/// the disk center (where the true phase vanishes); each ray truncates at
/// its first invalid node.
inline PhaseSystem
build_degenerate_phase_system(const MuFrame &mu_s, const MuFrame &mu_t,
                              const Rotation &Rs, const Rotation & /*Rt*/,
                              double alpha, bool reflected) {
    if (!(mu_s.grid == mu_t.grid)) {
        throw ConfigError(
            "build_degenerate_phase_system: frames must share a grid");
    }
    const PolarGrid &g = mu_s.grid;
    const int n = g.size() / 2;
    const MuInterpolator interp_t(mu_t);
    const double floor_s = 1e-6 * max_amplitude(mu_s);
    const double floor_t = 1e-6 * max_amplitude(mu_t);

    PhaseSystem sys;
    sys.source = PhaseSource::Degenerate;
    // Wrapped phase of one node, or nullopt when an amplitude is too small.
    const auto node_phase = [&](int i, int j) -> std::optional<double> {
        const Complex vs = mu_s.at(i, j);
        if (std::abs(vs) <= floor_s) {
            return std::nullopt;
        }
        const double phi_rot = g.angles[j] - alpha;
        const std::optional<Complex> vt =
            reflected ? interp_t.at_polar(g.radii[i], -(g.angles[j]) - alpha)
                      : interp_t.at_polar(g.radii[i], phi_rot);
        if (!vt || std::abs(*vt) <= floor_t) {
            return std::nullopt;
        }
        const Complex ratio = reflected ? vs / std::conj(*vt) : vs / *vt;
        return std::arg(ratio);
    };
    // March each half-ray outward from the disk center; the virtual anchor
    // at r = 0 has phase 0 exactly (h(0) = 0).
    for (int j = 0; j < g.size(); ++j) {
        for (const bool outward : {true, false}) {
            double prev = 0.0;
            for (int step = 0; step < n; ++step) {
                const int i = outward ? n + step : n - 1 - step;
                const std::optional<double> raw = node_phase(i, j);
                if (!raw) {
                    break;
                }
                const double phase = prev + wrap_pi(*raw - prev);
                sys.rows.push_back({Rs * h_map(g.node(i, j), g.k0), phase});
                prev = phase;
            }
        }
    }
    if (sys.rows.empty()) {
        throw EmptySupportError(
            "build_degenerate_phase_system: no node pair above the amplitude "
            "floor");
    }
    return sys;
}

// =============================================================================
// Least-squares translation solve
// =============================================================================

namespace detail {

/// Minimum-norm least-squares solution of <u, direction> = rhs over all
/// rows, with a rank guard on the 3-column design matrix.
inline Vec3 solve_phase_rows(const std::vector<const PhaseSystem *> &systems,
                             const char *what) {
    std::size_t m = 0;
    for (const PhaseSystem *sys : systems) {
        m += sys->rows.size();
    }
    if (m == 0) {
        throw EmptySupportError(std::string(what) + ": no rows to solve");
    }
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd b(m);
    std::size_t r = 0;
    for (const PhaseSystem *sys : systems) {
        for (const PhaseRow &row : sys->rows) {
            A.row(r) = row.direction.transpose();
            b(r) = row.rhs;
            ++r;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                                 Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (!(sv(2) > 1e-8 * sv(0))) {
        throw RankDeficientError(
            std::string(what) +
            ": phase directions do not span 3-space; translation is not "
            "unique for this geometry");
    }
    return svd.solve(b);
}

} // namespace detail

/// Solve the stacked systems of one frame pair for d_t.  All systems must
/// share the pair (s, t); the unknown x = R_t d_t - R_s d_s is recovered by
/// minimum-norm least squares and unpacked with the known d_s.
inline Vec3 solve_translation(const std::vector<PhaseSystem> &systems,
                              const Rotation &Rs, const Rotation &Rt,
                              const Vec3 &d_s) {
    std::vector<const PhaseSystem *> ptrs;
    ptrs.reserve(systems.size());
    for (const PhaseSystem &sys : systems) {
        ptrs.push_back(&sys);
    }
    const Vec3 x = detail::solve_phase_rows(ptrs, "solve_translation");
    return Rt.transpose() * (x + Rs * d_s);
}

// =============================================================================
// Trajectory-level estimation
// =============================================================================

/// Remove a translation estimate from a frame: multiplies each node by
/// e^{+i<d, h(k)>}, cancelling the factor e^{-i<d, h(k)>} the forward model
/// attaches.  Demodulated frames oscillate much slower, which makes the
/// interpolated arc phases of a follow-up pass far more accurate.
inline MuFrame demodulate(const MuFrame &frame, const Vec3 &d) {
    MuFrame out = frame;
    const PolarGrid &g = frame.grid;
    for (int i = 0; i < g.size(); ++i) {
        for (int j = 0; j < g.size(); ++j) {
            const Vec3 hk = h_map(g.node(i, j), g.k0);
            out.values[g.flat(i, j)] *= std::exp(Complex(0.0, d.dot(hk)));
        }
    }
    return out;
}

namespace detail {

/// In-plane angle and branch of a (near-)degenerate relative rotation
/// R_rel ~ Qz(alpha) or Qy(pi) Qz(alpha).
inline std::pair<double, bool> degenerate_angle(const Rotation &R_rel) {
    if (R_rel(2, 2) > 0.0) {
        return {std::atan2(R_rel(1, 0), R_rel(0, 0)), false};
    }
    return {std::atan2(R_rel(1, 0), R_rel(1, 1)), true};
}

/// Phase systems of the pair (s, t), using the arc route for generic pairs
/// and the whole-disk route when the pose axes are collinear.
inline std::vector<PhaseSystem>
pair_systems(const MuFrame &mu_s, const MuInterpolator &interp_s,
             double floor_s, const MuFrame &mu_t, const Rotation &Rs,
             const Rotation &Rt, int n_beta) {
    try {
        const MuInterpolator interp_t(mu_t);
        auto [primal, dual] =
            build_phase_system(interp_s, interp_t, floor_s,
                               1e-6 * max_amplitude(mu_t), Rs, Rt, n_beta);
        std::vector<PhaseSystem> systems;
        systems.push_back(std::move(primal));
        systems.push_back(std::move(dual));
        return systems;
    } catch (const DegenerateInputError &) {
        const auto [alpha, reflected] =
            degenerate_angle(Rotation(Rs.transpose() * Rt));
        return {build_degenerate_phase_system(mu_s, mu_t, Rs, Rt, alpha,
                                              reflected)};
    }
}

} // namespace detail

/// Per-frame translations from complex measurements and known rotations.
///
/// Frame 0 is the reference with d_0 = 0; every other frame is solved
/// against it.  `passes` rounds of demodulation are applied: after each
/// round the current estimates are removed from the frames and the systems
/// are rebuilt, so the residual phases shrink toward zero and interpolation
/// error stops limiting the accuracy.  With `stack_consecutive` the system
/// of the pair (t-1, t) is stacked on top of (0, t) using the estimate of
/// d_{t-1} from the same pass.
inline std::vector<Vec3>
estimate_translations(const std::vector<MuFrame> &frames,
                      const std::vector<Rotation> &rotations,
                      int n_beta = default_n_beta, int passes = 2,
                      bool stack_consecutive = false) {
    const std::size_t m = frames.size();
    if (m < 2 || rotations.size() != m) {
        throw ConfigError("estimate_translations: need >= 2 frames and one "
                          "rotation per frame");
    }
    if (passes < 1) {
        throw ConfigError("estimate_translations: need passes >= 1");
    }
    std::vector<Vec3> d_est(m, Vec3::Zero());
    for (int pass = 0; pass < passes; ++pass) {
        const MuFrame ref = demodulate(frames[0], d_est[0]);
        const MuInterpolator interp_ref(ref);
        const double floor_ref = 1e-6 * max_amplitude(ref);
        MuFrame prev = ref;
        Vec3 prev_residual = Vec3::Zero();
        for (std::size_t t = 1; t < m; ++t) {
            const MuFrame cur = demodulate(frames[t], d_est[t]);
            std::vector<PhaseSystem> systems =
                detail::pair_systems(ref, interp_ref, floor_ref, cur,
                                     rotations[0], rotations[t], n_beta);
            Vec3 residual;
            if (stack_consecutive && t >= 2) {
                // The consecutive pair shares the unknown R_t d_t once the
                // previous frame's residual is folded into its rhs; solve
                // both pairs jointly.
                std::vector<PhaseSystem> consec = detail::pair_systems(
                    prev, MuInterpolator(prev), 1e-6 * max_amplitude(prev),
                    cur, rotations[t - 1], rotations[t], n_beta);
                const Vec3 shift = rotations[t - 1] * prev_residual;
                for (PhaseSystem &sys : consec) {
                    for (PhaseRow &row : sys.rows) {
                        row.rhs += shift.dot(row.direction);
                    }
                    systems.push_back(std::move(sys));
                }
                std::vector<const PhaseSystem *> ptrs;
                for (const PhaseSystem &sys : systems) {
                    ptrs.push_back(&sys);
                }
                const Vec3 x =
                    detail::solve_phase_rows(ptrs, "estimate_translations");
                residual = rotations[t].transpose() * x;
            } else {
                residual = solve_translation(systems, rotations[0],
                                             rotations[t], Vec3::Zero());
            }
            d_est[t] += residual;
            prev = std::move(cur);
            prev_residual = residual;
        }
    }
    return d_est;
}

// =============================================================================
// Optical center
// =============================================================================

/// Per-frame optical-center data: the two numbers <C, R e1> and <C, R e2>
/// extracted from the measurement's first moment at the origin,
///   Re[ i * d/dk_i mu(0) / mu(0) ] - d_i = <C, R e^i>,  i in {1, 2},
/// with central differences of half-width delta (default: the radial grid
/// step).  Throws EmptySupportError when |mu(0)| is below the floor.
inline Vec2 optical_center(const MuFrame &mu, const Rotation &R, const Vec3 &d,
                           double delta = 0.0) {
    (void)R; // the projection <C, R e^i> is what this frame observes
    const MuInterpolator interp(mu);
    if (delta <= 0.0) {
        delta = mu.grid.radial_step();
    }
    const std::optional<Complex> center = interp.at(Vec2::Zero());
    if (!center || std::abs(*center) <= 1e-6 * max_amplitude(mu)) {
        throw EmptySupportError(
            "optical_center: measurement amplitude too small at the origin");
    }
    Vec2 out;
    for (int i = 0; i < 2; ++i) {
        const Vec2 step = delta * Vec2::Unit(i);
        const std::optional<Complex> fwd = interp.at(step);
        const std::optional<Complex> bwd = interp.at(-step);
        if (!fwd || !bwd) {
            throw EmptySupportError(
                "optical_center: finite-difference stencil leaves the disk");
        }
        const Complex deriv = (*fwd - *bwd) / (2.0 * delta);
        out(i) = (Complex(0.0, 1.0) * deriv / *center).real() - d(i);
    }
    return out;
}

/// Full optical center from several frames: stacks the per-frame conditions
/// <C, R e^i> = measured and solves for C.  Needs frames whose rotation
/// axes are not all collinear (else the rows span only a plane) — detected
/// by the rank guard.
inline Vec3 optical_center(const std::vector<MuFrame> &frames,
                           const std::vector<Rotation> &rotations,
                           const std::vector<Vec3> &translations,
                           double delta = 0.0) {
    const std::size_t m = frames.size();
    if (m < 2 || rotations.size() != m || translations.size() != m) {
        throw ConfigError("optical_center: need >= 2 frames with matching "
                          "rotations and translations");
    }
    Eigen::MatrixXd A(2 * m, 3);
    Eigen::VectorXd b(2 * m);
    for (std::size_t t = 0; t < m; ++t) {
        const Vec2 obs =
            optical_center(frames[t], rotations[t], translations[t], delta);
        for (int i = 0; i < 2; ++i) {
            A.row(2 * t + i) = rotations[t].col(i).transpose();
            b(2 * t + i) = obs(i);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                                 Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (!(sv(2) > 1e-8 * sv(0))) {
        throw RankDeficientError(
            "optical_center: frame axes are collinear; the center is only "
            "determined up to the shared axis");
    }
    return svd.solve(b);
}

} // namespace odt
