// odtmotion: rigid-motion estimation for optical diffraction tomography
// Experiment orchestration: simulate a rigid trajectory of an analytic
// phantom on the polar grid, run the selected estimator chain, and collect
// per-time-step error metrics against the ground truth.
#pragma once

#include <odt/detect.hpp>
#include <odt/direct.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/grid.hpp>
#include <odt/infinitesimal.hpp>
#include <odt/phantom.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>
#include <odt/stereo.hpp>
#include <odt/trajectory.hpp>
#include <odt/translation.hpp>
#include <odt/types.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace odt {

// =============================================================================
// Configuration
// =============================================================================

enum class Scenario { ConstantAxis, MovingAxis, WithTranslation, Custom };

enum class EstimatorKind { Direct, Infinitesimal, Combined, Stereo };

/// Full description of one experiment run.  Defaults reproduce the
/// constant-axis benchmark at desk scale (N = 64, 256 steps over one
/// revolution, k0 = 2*pi so the wavelength is one).
struct ExperimentConfig {
    Phantom phantom = default_phantom();
    double k0 = two_pi;
    int grid_n = 64;      ///< polar grid resolution N (2N radii x 2N angles)
    int time_steps = 256; ///< samples over t in [0, 2*pi)
    Scenario scenario = Scenario::ConstantAxis;
    Vec3 axis = benchmark_axis();    ///< constant-axis direction
    double moving_a = 0.28;          ///< axial component, moving-axis case
    double moving_b = 0.5;           ///< wander amplitude, moving-axis case
    double translation_amplitude = 4.0;
    EstimatorKind estimator = EstimatorKind::Combined;
    Retraction retraction = Retraction::Polar;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0; ///< relative noise level for add_noise
    std::string out_path;     ///< optional report destination (CLI)
    RigidTrajectory custom_trajectory; ///< used when scenario == Custom
};

/// Throws ConfigError when the configuration violates its invariants.
inline void validate_config(const ExperimentConfig &cfg) {
    if (cfg.grid_n < 16) {
        throw ConfigError("config: grid_n must be >= 16");
    }
    if (cfg.time_steps < 8) {
        throw ConfigError("config: time_steps must be >= 8");
    }
    if (!(cfg.k0 > 0.0)) {
        throw ConfigError("config: k0 must be positive");
    }
    if (cfg.scenario == Scenario::Custom &&
        (cfg.custom_trajectory.size() == 0 ||
         cfg.custom_trajectory.rotations.size() !=
             cfg.custom_trajectory.size() ||
         cfg.custom_trajectory.translations.size() !=
             cfg.custom_trajectory.size())) {
        throw ConfigError("config: custom scenario needs a complete trajectory");
    }
    validate_phantom(cfg.phantom);
}

/// Ground-truth trajectory of a configured scenario.
inline RigidTrajectory scenario_trajectory(const ExperimentConfig &cfg) {
    switch (cfg.scenario) {
    case Scenario::ConstantAxis:
        return constant_axis_trajectory(cfg.time_steps, cfg.axis);
    case Scenario::MovingAxis:
        return moving_axis_trajectory(cfg.time_steps, cfg.moving_a,
                                      cfg.moving_b);
    case Scenario::WithTranslation:
        return with_translation_trajectory(cfg.time_steps,
                                           cfg.translation_amplitude, cfg.axis);
    case Scenario::Custom:
        return cfg.custom_trajectory;
    }
    throw ConfigError("config: unknown scenario");
}

// =============================================================================
// Error metrics and report
// =============================================================================

/// Relative Frobenius distance ||R_true - R_est||_F / ||R_true||_F; the
/// denominator is sqrt(3) for any rotation.
inline double frob_rel_error(const Rotation &R_true, const Rotation &R_est) {
    return (R_true - R_est).norm() / R_true.norm();
}

/// Per-time-step error metrics of one run.  Columns not produced by the
/// selected estimator hold NaN; steps that raised an ambiguity hold NaN and
/// add a warning instead of aborting the run.
struct ErrorReport {
    ExperimentConfig config;
    std::vector<double> times;
    std::vector<double> err_pol;         ///< infinitesimal + polar retraction
    std::vector<double> err_cay;         ///< infinitesimal + Cayley retraction
    std::vector<double> err_cc;          ///< common-circle estimate (per kind)
    std::vector<double> err_translation; ///< ||d_t - d_t_hat||
    std::vector<double> j_min;           ///< scan residual minimum per step
    std::vector<std::string> warnings;
    int ambiguous_steps = 0;
    double seconds_simulate = 0.0;
    double seconds_estimate = 0.0;
};

// =============================================================================
// Worker pool
// =============================================================================

namespace detail {

/// Run fn(i) for i in [0, n) on up to `threads` workers.  Writers must touch
/// only index-i state so results are identical for any thread count.  The
/// first exception (if any) is rethrown on the caller.
template <typename F>
void parallel_for(int n, F &&fn,
                  unsigned threads = std::thread::hardware_concurrency()) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    const unsigned workers =
        std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (std::thread &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace detail

// =============================================================================
// Estimation chains
// =============================================================================

namespace detail {

inline constexpr double report_nan = std::numeric_limits<double>::quiet_NaN();

} // namespace detail

/// Outcome of running an estimator chain on a frame sequence.  The final
/// per-step rotations live in `rotations`; when the infinitesimal stage ran,
/// both integrated trajectories and the per-step scan minima are kept too.
struct MotionEstimate {
    std::vector<Rotation> rotations;
    std::vector<Rotation> inf_polar;  ///< empty unless the scan stage ran
    std::vector<Rotation> inf_cayley; ///< empty unless the scan stage ran
    std::vector<double> j_min;        ///< NaN where not computed
    std::vector<char> step_failed;    ///< 1 where a step raised an ambiguity
    std::vector<std::string> warnings;
    int ambiguous_steps = 0;
};

/// Run one estimator chain against reference frame 0.
///
///   infinitesimal: per-step angular velocity scan, integrated with both
///     retractions; `rotations` is the configured retraction's trajectory;
///   direct: per-step energy minimization against frame 0 from the coarse
///     grid;
///   combined: the infinitesimal trajectory (configured retraction) seeds
///     the per-step energy refinement;
///   stereo: per-step line matching in the chart plane.
/// Ambiguity errors in single steps are recorded as warnings (the step
/// keeps the identity estimate); the run continues.
inline MotionEstimate estimate_motion(const std::vector<NuFrame> &frames,
                                      const std::vector<double> &times,
                                      EstimatorKind estimator,
                                      Retraction retraction) {
    const int steps = static_cast<int>(frames.size());
    if (steps < 2 || times.size() != frames.size()) {
        throw ConfigError("estimate_motion: need >= 2 frames with times");
    }
    const PolarGrid &grid = frames[0].grid;
    for (const NuFrame &f : frames) {
        if (!(f.grid == grid)) {
            throw ConfigError("estimate_motion: frames on different grids");
        }
    }

    MotionEstimate out;
    out.rotations.assign(steps, Mat3::Identity());
    out.j_min.assign(steps, detail::report_nan);
    out.step_failed.assign(steps, 0);

    const bool want_infinitesimal = estimator == EstimatorKind::Infinitesimal ||
                                    estimator == EstimatorKind::Combined;
    if (want_infinitesimal) {
        std::vector<AngularVelocity> omegas(steps);
        std::vector<std::string> step_warnings(steps);
        std::vector<char> step_ambiguous(steps, 0);
        detail::parallel_for(steps, [&](int j) {
            try {
                const PhiScan scan = scan_phi(frames, grid, j);
                out.j_min[j] = scan.j_values[scan.best_index];
                omegas[j] = {scan.rho_hat[scan.best_index],
                             scan.phis[scan.best_index],
                             scan.zeta_hat[scan.best_index]};
                if (scan.competing_minimum) {
                    step_warnings[j] = "step " + std::to_string(j) +
                                       ": competing scan minimum";
                }
            } catch (const AmbiguityError &err) {
                omegas[j] = {};
                step_warnings[j] = "step " + std::to_string(j) +
                                   ": ambiguous scan (" + err.what() + ")";
                step_ambiguous[j] = 1;
            }
        });
        for (int j = 0; j < steps; ++j) {
            if (!step_warnings[j].empty()) {
                out.warnings.push_back(std::move(step_warnings[j]));
            }
            out.ambiguous_steps += step_ambiguous[j];
            out.step_failed[j] |= step_ambiguous[j];
        }
        out.inf_polar = integrate_rotation(times, omegas, Retraction::Polar);
        out.inf_cayley = integrate_rotation(times, omegas, Retraction::Cayley);
    }

    if (estimator == EstimatorKind::Infinitesimal) {
        out.rotations = retraction == Retraction::Cayley ? out.inf_cayley
                                                         : out.inf_polar;
        return out;
    }

    const PolarInterpolator interp_ref(frames[0]);
    const std::vector<Rotation> &init_traj =
        retraction == Retraction::Cayley ? out.inf_cayley : out.inf_polar;
    std::vector<std::string> step_warnings(steps);
    std::vector<char> step_ambiguous(steps, 0);
    detail::parallel_for(steps, [&](int j) {
        if (j == 0) {
            return; // reference frame: identity by convention
        }
        try {
            const PolarInterpolator interp_j(frames[j]);
            if (estimator == EstimatorKind::Stereo) {
                out.rotations[j] =
                    estimate_rotation_stereo(interp_ref, interp_j);
            } else if (estimator == EstimatorKind::Combined) {
                out.rotations[j] = estimate_rotation_direct(
                    frames[0], frames[j], interp_ref, interp_j,
                    rotation_to_euler(init_traj[j]));
            } else {
                out.rotations[j] = estimate_rotation_direct(
                    frames[0], frames[j], interp_ref, interp_j);
            }
        } catch (const AmbiguityError &err) {
            step_warnings[j] = "step " + std::to_string(j) +
                               ": ambiguous estimate (" + err.what() + ")";
            step_ambiguous[j] = 1;
        }
    });
    for (int j = 0; j < steps; ++j) {
        if (!step_warnings[j].empty()) {
            out.warnings.push_back(std::move(step_warnings[j]));
        }
        out.ambiguous_steps += step_ambiguous[j];
        out.step_failed[j] |= step_ambiguous[j];
    }
    return out;
}

// =============================================================================
// Scenario execution
// =============================================================================

/// Simulate and estimate one configured experiment; see estimate_motion for
/// the estimator chains.  The translation scenario additionally recovers d_t
/// from the complex frames using the estimated rotations.
inline ErrorReport run_scenario(const ExperimentConfig &cfg) {
    validate_config(cfg);
    const RigidTrajectory truth = scenario_trajectory(cfg);
    const int steps = static_cast<int>(truth.size());
    const PolarGrid grid = PolarGrid::standard(cfg.k0, cfg.grid_n);

    ErrorReport report;
    report.config = cfg;
    report.times = truth.times;
    report.err_pol.assign(steps, detail::report_nan);
    report.err_cay.assign(steps, detail::report_nan);
    report.err_cc.assign(steps, detail::report_nan);
    report.err_translation.assign(steps, detail::report_nan);
    report.j_min.assign(steps, detail::report_nan);

    // --- simulation ---------------------------------------------------------
    const auto sim_start = std::chrono::steady_clock::now();
    const bool need_mu =
        cfg.scenario == Scenario::WithTranslation || cfg.noise_sigma > 0.0;
    std::vector<MuFrame> mus(need_mu ? steps : 0);
    std::vector<NuFrame> nus(steps);
    detail::parallel_for(steps, [&](int j) {
        if (need_mu) {
            MuFrame mu = simulate_mu(cfg.phantom, truth.rotations[j],
                                     truth.translations[j], grid,
                                     truth.times[j]);
            if (cfg.noise_sigma > 0.0) {
                add_noise(mu, cfg.noise_sigma,
                          cfg.seed * 1000003ULL + static_cast<std::uint64_t>(j));
            }
            nus[j] = nu_from_mu(mu);
            mus[j] = std::move(mu);
        } else {
            nus[j] = simulate_nu(cfg.phantom, truth.rotations[j],
                                 truth.translations[j], grid, truth.times[j]);
        }
    });
    report.seconds_simulate =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      sim_start)
            .count();

    // --- estimation ---------------------------------------------------------
    const auto est_start = std::chrono::steady_clock::now();
    MotionEstimate estimate =
        estimate_motion(nus, truth.times, cfg.estimator, cfg.retraction);
    report.j_min = estimate.j_min;
    report.warnings = estimate.warnings;
    report.ambiguous_steps = estimate.ambiguous_steps;
    if (!estimate.inf_polar.empty()) {
        for (int j = 0; j < steps; ++j) {
            report.err_pol[j] =
                frob_rel_error(truth.rotations[j], estimate.inf_polar[j]);
            report.err_cay[j] =
                frob_rel_error(truth.rotations[j], estimate.inf_cayley[j]);
        }
    }
    if (cfg.estimator != EstimatorKind::Infinitesimal) {
        for (int j = 0; j < steps; ++j) {
            report.err_cc[j] = estimate.step_failed[j]
                                   ? detail::report_nan
                                   : frob_rel_error(truth.rotations[j],
                                                    estimate.rotations[j]);
        }
    }

    if (cfg.scenario == Scenario::WithTranslation) {
        try {
            const std::vector<Vec3> d_est =
                estimate_translations(mus, estimate.rotations);
            for (int j = 0; j < steps; ++j) {
                report.err_translation[j] =
                    (d_est[j] - truth.translations[j]).norm();
            }
        } catch (const Error &err) {
            report.warnings.push_back(std::string("translation: ") +
                                      err.what());
            if (dynamic_cast<const AmbiguityError *>(&err) != nullptr) {
                ++report.ambiguous_steps;
            }
        }
    }
    report.seconds_estimate =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      est_start)
            .count();
    return report;
}

} // namespace odt
