// Common-circle arcs: bases, validity intervals, hemisphere identities.
#include "support/oracles.hpp"

#include <odt/arcs.hpp>
#include <odt/errors.hpp>
#include <odt/geometry.hpp>
#include <odt/so3.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace odt;

namespace {
const double k0 = two_pi;
}

TEST_CASE("odt::arcs, basis frames are orthonormal and consistent",
          "[arcs]") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 50; ++rep) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        const ArcBasis b = arc_basis(Rs, Rt, k0);
        REQUIRE(b.v1.norm() == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(b.v2.norm() == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(b.v3.norm() == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(std::abs(b.v1.dot(b.v2)) < 1e-12);
        REQUIRE(std::abs(b.v1.dot(b.v3)) < 1e-12);
        REQUIRE(std::abs(b.v2.dot(b.v3)) < 1e-12);
        REQUIRE(std::abs(b.w1.dot(b.w2)) < 1e-12);
        // Half-angle radii: a = k0 cos(angle/2), a* = k0 sin(angle/2) with
        // cos(angle) = <ns, nt>; the two radii lie on a circle of radius k0.
        const double angle = std::acos(std::clamp(b.c, -1.0, 1.0));
        REQUIRE(b.a == Catch::Approx(k0 * std::cos(0.5 * angle)).margin(1e-10));
        REQUIRE(b.a_star ==
                Catch::Approx(k0 * std::sin(0.5 * angle)).margin(1e-10));
        REQUIRE(b.a_tilde ==
                Catch::Approx(0.5 * k0 * std::sin(angle)).margin(1e-10));
        REQUIRE(b.a * b.a + b.a_star * b.a_star ==
                Catch::Approx(k0 * k0).epsilon(1e-12));
    }
}

TEST_CASE("odt::arcs, validity intervals cap or free the parameter",
          "[arcs]") {
    const Rotation Rs = Mat3::Identity();

    // Acute axis angle: primal interval capped beyond pi/2, dual is free.
    const Rotation tilted = rodrigues_exp(Vec3(1.0, 0.0, 0.0), 0.8);
    const ArcInterval J = interval_J(Rs, tilted);
    REQUIRE_FALSE(J.full);
    REQUIRE(J.beta_max > 0.5 * pi);
    REQUIRE(J.contains(0.0));
    REQUIRE(J.contains(-J.beta_max + 1e-9));
    REQUIRE_FALSE(J.contains(J.beta_max + 1e-6));
    REQUIRE(interval_J_dual(Rs, tilted).full);

    // Obtuse axis angle: roles swap.
    const Rotation far = rodrigues_exp(Vec3(1.0, 0.0, 0.0), 2.6);
    REQUIRE(interval_J(Rs, far).full);
    const ArcInterval Jd = interval_J_dual(Rs, far);
    REQUIRE_FALSE(Jd.full);
    REQUIRE(Jd.beta_max > 0.5 * pi);

    // Collinear axes are degenerate for the arc construction.
    REQUIRE_THROWS_AS(interval_J(Rs, axis_rotation_z(0.4)),
                      DegenerateInputError);
}

TEST_CASE("odt::arcs, sigma stays on both measurement spheres", "[arcs]") {
    std::mt19937_64 rng(72);
    std::uniform_real_distribution<double> u(-0.5 * pi, 0.5 * pi);
    for (int rep = 0; rep < 60; ++rep) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        const double beta = u(rng);

        const Vec3 p = sigma(Rs, Rt, beta, k0);
        // On the sphere of frame s AND of frame t: the common circle.
        REQUIRE((p + k0 * Rs.col(2)).norm() ==
                Catch::Approx(k0).epsilon(1e-12));
        REQUIRE((p + k0 * Rt.col(2)).norm() ==
                Catch::Approx(k0).epsilon(1e-12));
        REQUIRE((sigma(Rt, Rs, -beta, k0) - p).norm() < 1e-10);

        const Vec3 q = sigma_dual(Rs, Rt, beta, k0);
        // On the sphere of s and on the REFLECTED sphere of t.
        REQUIRE((q + k0 * Rs.col(2)).norm() ==
                Catch::Approx(k0).epsilon(1e-12));
        REQUIRE((q - k0 * Rt.col(2)).norm() ==
                Catch::Approx(k0).epsilon(1e-12));
        REQUIRE((sigma_dual(Rt, Rs, beta, k0) + q).norm() < 1e-10);
    }
}

TEST_CASE("odt::arcs, gamma is the disk preimage of sigma", "[arcs]") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(-0.5 * pi, 0.5 * pi);
    for (int rep = 0; rep < 60; ++rep) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        const double beta = u(rng);

        const Vec2 g_s = gamma(Rs, Rt, beta, k0);
        const Vec2 g_t = gamma(Rt, Rs, -beta, k0);
        const Vec3 p = sigma(Rs, Rt, beta, k0);
        REQUIRE((Rs * h_map(g_s, k0) - p).norm() < 1e-10);
        REQUIRE((Rt * h_map(g_t, k0) - p).norm() < 1e-10);

        const Vec2 gd_s = gamma_dual(Rs, Rt, beta, k0);
        const Vec2 gd_t = gamma_dual(Rt, Rs, beta, k0);
        const Vec3 q = sigma_dual(Rs, Rt, beta, k0);
        REQUIRE((Rs * h_map(gd_s, k0) - q).norm() < 1e-10);
        REQUIRE((Rt * h_map(gd_t, k0) + q).norm() < 1e-10);
    }
}

TEST_CASE("odt::arcs, out-of-interval beta is rejected", "[arcs]") {
    const Rotation Rs = Mat3::Identity();
    const Rotation Rt = rodrigues_exp(Vec3(0.0, 1.0, 0.0), 0.6);
    const ArcInterval J = interval_J(Rs, Rt);
    REQUIRE_FALSE(J.full);
    REQUIRE_THROWS_AS(gamma(Rs, Rt, J.beta_max + 0.01, k0), OutOfDiskError);
    REQUIRE_THROWS_AS(sigma(Rs, Rt, -J.beta_max - 0.01, k0), OutOfDiskError);
}

TEST_CASE("odt::arcs, Euler form matches the pose form", "[arcs]") {
    // For relative rotation with Euler angles (phi, theta, psi), the s-side
    // arc depends only on (phi, theta); the t-side uses (pi - psi, theta).
    std::mt19937_64 rng(74);
    std::uniform_real_distribution<double> u(-0.5 * pi, 0.5 * pi);
    for (int rep = 0; rep < 60; ++rep) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        const EulerZYZ e = rotation_to_euler(Rotation(Rs.transpose() * Rt));
        const double beta = u(rng);

        const Vec2 from_euler = gamma_euler(e.phi, e.theta, beta, k0);
        const Vec2 from_pose = gamma(Rs, Rt, beta, k0);
        REQUIRE((from_euler - from_pose).norm() < 1e-10);
        const Vec2 t_euler = gamma_euler(pi - e.psi, e.theta, -beta, k0);
        const Vec2 t_pose = gamma(Rt, Rs, -beta, k0);
        REQUIRE((t_euler - t_pose).norm() < 1e-10);

        const Vec2 d_euler = gamma_dual_euler(e.phi, e.theta, beta, k0);
        const Vec2 d_pose = gamma_dual(Rs, Rt, beta, k0);
        REQUIRE((d_euler - d_pose).norm() < 1e-10);
        const Vec2 dt_euler = gamma_dual_euler(pi - e.psi, e.theta, beta, k0);
        const Vec2 dt_pose = gamma_dual(Rt, Rs, beta, k0);
        REQUIRE((dt_euler - dt_pose).norm() < 1e-10);
    }
}

TEST_CASE("odt::arcs, beta_grid is symmetric and covers [-pi/2, pi/2]",
          "[arcs]") {
    const std::vector<double> betas = beta_grid(default_n_beta);
    REQUIRE(betas.size() == std::size_t(2 * default_n_beta + 1));
    REQUIRE(betas.front() == Catch::Approx(-0.5 * pi));
    REQUIRE(betas.back() == Catch::Approx(0.5 * pi));
    REQUIRE(betas[default_n_beta] == 0.0);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        REQUIRE(betas[i] == Catch::Approx(-betas[betas.size() - 1 - i])
                                .margin(1e-15));
    }
}
