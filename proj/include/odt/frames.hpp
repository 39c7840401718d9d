// odtmotion: rigid-motion estimation for optical diffraction tomography
// Measurement frames on the polar grid and the exact forward model.  A frame
// at time t holds either the scaled complex measurement
//   mu_t(k) = F[f](R_t h(k)) * exp(-i <d_t, h(k)>)
// or the translation-invariant squared energy
//   nu_t(k) = |F[f](R_t h(k))|^2
// for a rigid motion (R_t, d_t) of the object f.
#pragma once

#include <odt/errors.hpp>
#include <odt/geometry.hpp>
#include <odt/grid.hpp>
#include <odt/phantom.hpp>
#include <odt/types.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace odt {

// =============================================================================
// Frame containers
// =============================================================================

/// Complex scaled measurement mu sampled on a polar grid.
struct MuFrame {
    PolarGrid grid;
    double time = 0.0;
    std::vector<Complex> values; ///< grid.size()^2, radius-major

    Complex at(int i, int j) const { return values[grid.flat(i, j)]; }
};

/// Real squared-energy field nu sampled on a polar grid.
struct NuFrame {
    PolarGrid grid;
    double time = 0.0;
    std::vector<double> values; ///< grid.size()^2, radius-major

    double at(int i, int j) const { return values[grid.flat(i, j)]; }
};

// =============================================================================
// Point evaluation of the forward model
// =============================================================================

/// mu at a single frequency: F[f](R h(k)) * exp(-i <d, h(k)>).
inline Complex mu_at(const Phantom &ph, const Rotation &R, const Vec3 &d,
                     double k0, const Vec2 &k) {
    const Vec3 hk = h_map(k, k0);
    const Complex field = phantom_ft(ph, R * hk);
    const double phase = -d.dot(hk);
    return field * Complex(std::cos(phase), std::sin(phase));
}

/// nu at a single frequency: |F[f](R h(k))|^2 (independent of translation).
inline double nu_at(const Phantom &ph, const Rotation &R, double k0,
                    const Vec2 &k) {
    const Complex field = phantom_ft(ph, R * h_map(k, k0));
    return std::norm(field);
}

// =============================================================================
// Frame simulation
// =============================================================================

/// Simulate a complex measurement frame for pose (R, d) at time t.
inline MuFrame simulate_mu(const Phantom &ph, const Rotation &R, const Vec3 &d,
                           const PolarGrid &grid, double t = 0.0) {
    MuFrame f;
    f.grid = grid;
    f.time = t;
    const int m = grid.size();
    f.values.resize(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            f.values[grid.flat(i, j)] = mu_at(ph, R, d, grid.k0, grid.node(i, j));
        }
    }
    return f;
}

/// Elementwise |mu|^2 of a measurement frame.
inline NuFrame nu_from_mu(const MuFrame &mu) {
    NuFrame f;
    f.grid = mu.grid;
    f.time = mu.time;
    f.values.resize(mu.values.size());
    for (std::size_t idx = 0; idx < mu.values.size(); ++idx) {
        f.values[idx] = std::norm(mu.values[idx]);
    }
    return f;
}

/// Simulate a squared-energy frame for pose (R, d) at time t.  Defined as
/// |simulate_mu|^2 elementwise; the translation only enters through a
/// unimodular phase, so the result is independent of d.
inline NuFrame simulate_nu(const Phantom &ph, const Rotation &R, const Vec3 &d,
                           const PolarGrid &grid, double t = 0.0) {
    return nu_from_mu(simulate_mu(ph, R, d, grid, t));
}

/// Largest amplitude |mu| over the nodes of a frame.
inline double max_amplitude(const MuFrame &mu) {
    double m = 0.0;
    for (const Complex &v : mu.values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// =============================================================================
// Measurement scaling
// =============================================================================

/// Convert a raw 2D-Fourier-transformed field measurement at frequency k,
/// recorded at detector distance r_M, into the scaled value mu:
///   mu = -i * sqrt(2/pi) * kappa(k) * exp(-i kappa(k) r_M) * m_hat.
/// Inverse of forward_factor(): scale_measurement(forward_factor * z) == z.
inline Complex scale_measurement(Complex m_hat, const Vec2 &k, double r_M,
                                 double k0) {
    const double kap = kappa(k, k0);
    const Complex rot =
        Complex(std::cos(kap * r_M), -std::sin(kap * r_M)); // exp(-i kappa r_M)
    return Complex(0.0, -1.0) * std::sqrt(2.0 / pi) * kap * rot * m_hat;
}

/// Propagation factor relating object Fourier data to the measured field at
/// detector distance r_M:
///   F[m_t](k) = forward_factor(k) * F[f](R_t h(k)) * exp(-i <d_t, h(k)>),
///   forward_factor(k) = sqrt(pi/2) * i * exp(i kappa(k) r_M) / kappa(k).
inline Complex forward_factor(const Vec2 &k, double r_M, double k0) {
    const double kap = kappa(k, k0);
    const Complex rot = Complex(std::cos(kap * r_M), std::sin(kap * r_M));
    return std::sqrt(pi / 2.0) * Complex(0.0, 1.0) * rot / kap;
}

// =============================================================================
// Optional measurement noise
// =============================================================================

/// Add centred Gaussian noise to a measurement frame, independently on real
/// and imaginary parts, with standard deviation sigma_rel times the clean
/// frame's maximum amplitude.  Deterministic for a fixed seed.
inline void add_noise(MuFrame &mu, double sigma_rel, std::uint64_t seed) {
    if (sigma_rel <= 0.0) {
        return;
    }
    const double sigma = sigma_rel * max_amplitude(mu);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Complex &v : mu.values) {
        v += Complex(gauss(rng), gauss(rng));
    }
}

} // namespace odt
