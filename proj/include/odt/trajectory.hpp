// odtmotion: rigid-motion estimation for optical diffraction tomography
// Ground-truth rigid trajectories for the benchmark scenarios: a constant
// rotation axis (closed-form via the Rodrigues formula), a slowly wandering
// axis (integrated to high accuracy), and the constant-axis motion with a
// sinusoidal translation on top.  All scenarios start at the identity pose.
#pragma once

#include <odt/errors.hpp>
#include <odt/so3.hpp>
#include <odt/types.hpp>

#include <cmath>
#include <vector>

namespace odt {

/// Rigid motion sampled in time: pose t maps object coordinates x to
/// R_t x + d_t.
struct RigidTrajectory {
    std::vector<double> times;
    std::vector<Rotation> rotations;
    std::vector<Vec3> translations;

    std::size_t size() const { return times.size(); }
};

/// Benchmark rotation axis (0.96 cos(pi/4), 0.96 sin(pi/4), 0.28): unit
/// length, in-plane direction pi/4, in-plane magnitude 0.96, axial part
/// 0.28.
inline Vec3 benchmark_axis() {
    return {0.96 * std::cos(0.25 * pi), 0.96 * std::sin(0.25 * pi), 0.28};
}

/// Body angular velocity of the wandering-axis scenario:
///   omega(t) = (sqrt(1-a^2) cos(b sin(t/2)), sqrt(1-a^2) sin(b sin(t/2)), a).
inline Vec3 moving_axis_omega(double t, double a = 0.28, double b = 0.5) {
    const double in_plane = std::sqrt(1.0 - a * a);
    const double angle = b * std::sin(0.5 * t);
    return {in_plane * std::cos(angle), in_plane * std::sin(angle), a};
}

namespace detail {

/// Uniform times t_j = j * 2*pi / steps covering one revolution [0, 2*pi).
inline std::vector<double> revolution_times(int steps) {
    if (steps < 2) {
        throw ConfigError("trajectory: need at least 2 time steps");
    }
    std::vector<double> t(steps);
    for (int j = 0; j < steps; ++j) {
        t[j] = two_pi * j / steps;
    }
    return t;
}

} // namespace detail

/// Constant-axis rotation R(t) = exp(t * hat(axis)), no translation.
inline RigidTrajectory constant_axis_trajectory(int steps,
                                                const Vec3 &axis = benchmark_axis()) {
    RigidTrajectory traj;
    traj.times = detail::revolution_times(steps);
    traj.rotations.reserve(steps);
    traj.translations.assign(steps, Vec3::Zero());
    for (const double t : traj.times) {
        traj.rotations.push_back(rodrigues_exp(axis.normalized(), t));
    }
    return traj;
}

/// Wandering-axis rotation: R' = R hat(moving_axis_omega(t)), R(0) = I,
/// integrated with an exponential midpoint rule on `substeps` sub-intervals
/// per sample step — second-order accurate, so the reference trajectory is
/// far more accurate than anything estimated from data.
inline RigidTrajectory moving_axis_trajectory(int steps, double a = 0.28,
                                              double b = 0.5,
                                              int substeps = 32) {
    RigidTrajectory traj;
    traj.times = detail::revolution_times(steps);
    traj.rotations.reserve(steps);
    traj.translations.assign(steps, Vec3::Zero());
    Rotation R = Mat3::Identity();
    traj.rotations.push_back(R);
    for (int j = 1; j < steps; ++j) {
        const double t0 = traj.times[j - 1];
        const double dt = (traj.times[j] - t0) / substeps;
        for (int s = 0; s < substeps; ++s) {
            const Vec3 w = moving_axis_omega(t0 + (s + 0.5) * dt, a, b);
            const double angle = w.norm() * dt;
            R = R * rodrigues_exp(w.normalized(), angle);
        }
        // Re-orthonormalize against drift accumulated over many products.
        R = polar_retract(R);
        traj.rotations.push_back(R);
    }
    return traj;
}

/// Constant-axis rotation plus the sinusoidal translation
/// d(t) = amplitude * (sin t, sin t, sin t); d(0) = 0.
inline RigidTrajectory
with_translation_trajectory(int steps, double amplitude = 4.0,
                            const Vec3 &axis = benchmark_axis()) {
    RigidTrajectory traj = constant_axis_trajectory(steps, axis);
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const double s = std::sin(traj.times[j]);
        traj.translations[j] = amplitude * Vec3(s, s, s);
    }
    return traj;
}

} // namespace odt
