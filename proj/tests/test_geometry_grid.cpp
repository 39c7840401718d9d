// Hemisphere geometry (kappa, h) and the signed polar measurement grid.
#include <odt/errors.hpp>
#include <odt/geometry.hpp>
#include <odt/grid.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace odt;

TEST_CASE("odt::geometry, h lies on the measurement sphere", "[geometry]") {
    const double k0 = two_pi;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.99 * k0 / std::sqrt(2.0),
                                             0.99 * k0 / std::sqrt(2.0));
    for (int rep = 0; rep < 200; ++rep) {
        const Vec2 k(u(rng), u(rng));
        const Vec3 y = h_map(k, k0);
        // h(k) + k0 e3 has length k0: the hemisphere through the origin.
        REQUIRE((y + k0 * Vec3::UnitZ()).norm() ==
                Catch::Approx(k0).epsilon(1e-13));
        REQUIRE(y.z() <= 0.0);
        REQUIRE(y.x() == k.x());
        REQUIRE(y.y() == k.y());
    }
    REQUIRE(h_map(Vec2::Zero(), k0).norm() == 0.0);
}

TEST_CASE("odt::geometry, h is not odd in k", "[geometry]") {
    // The third component does not flip sign with k; relying on
    // h(-k) = -h(k) anywhere would be a real bug, so pin the asymmetry.
    const double k0 = two_pi;
    const Vec2 k(2.0, 1.0);
    const Vec3 plus = h_map(k, k0);
    const Vec3 minus = h_map(-k, k0);
    REQUIRE(plus.z() == minus.z());
    REQUIRE((plus + minus).norm() > 1.0);
}

TEST_CASE("odt::geometry, kappa consistency", "[geometry]") {
    const double k0 = two_pi;
    REQUIRE(kappa(Vec2(0.0, 0.0), k0) == k0);
    REQUIRE(kappa(0.6 * k0, k0) == Catch::Approx(0.8 * k0).epsilon(1e-14));
    REQUIRE(kappa(-0.6 * k0, k0) == Catch::Approx(0.8 * k0).epsilon(1e-14));
    REQUIRE_THROWS_AS(kappa(1.5 * k0, k0), OutOfDiskError);
}

TEST_CASE("odt::grid, standard node layout", "[grid]") {
    const double k0 = two_pi;
    const int n = 64;
    const PolarGrid g = PolarGrid::standard(k0, n);
    REQUIRE(g.size() == 2 * n);
    REQUIRE(int(g.radii.size()) == 2 * n);
    REQUIRE(int(g.angles.size()) == 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        REQUIRE(g.radii[i] ==
                Catch::Approx((i - n + 0.5) * k0 / n).margin(1e-13));
    }
    for (int j = 0; j < 2 * n; ++j) {
        REQUIRE(g.angles[j] == Catch::Approx(j * pi / (2 * n)).margin(1e-13));
    }
    REQUIRE(g.max_radius() < k0); // rim is excluded by the half-cell offset
    REQUIRE(g.radial_step() == k0 / n);
    REQUIRE(g.angular_step() == pi / (2.0 * n));
    REQUIRE_THROWS_AS(PolarGrid::standard(-1.0, n), ConfigError);
    REQUIRE_THROWS_AS(PolarGrid::standard(k0, 0), ConfigError);
}

TEST_CASE("odt::grid, signed radius covers the full disk", "[grid]") {
    const PolarGrid g = PolarGrid::standard(two_pi, 16);
    // (r, phi) and (-r, phi + pi) name the same point.
    for (int i = 0; i < g.size(); ++i) {
        for (int j = 0; j < g.size(); ++j) {
            const Vec2 p = g.node(i, j);
            const Vec2 mirrored =
                -g.radii[i] *
                Vec2(std::cos(g.angles[j] + pi), std::sin(g.angles[j] + pi));
            REQUIRE((p - mirrored).norm() < 1e-12);
        }
    }
    REQUIRE(g.flip_radius(0) == g.size() - 1);
    REQUIRE(g.flip_radius(g.size() - 1) == 0);
}

TEST_CASE("odt::grid, reduce_signed_polar canonical form", "[grid]") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> ur(-5.0, 5.0);
    std::uniform_real_distribution<double> ua(-20.0, 20.0);
    for (int rep = 0; rep < 300; ++rep) {
        const double r = ur(rng);
        const double phi = ua(rng);
        const SignedPolar sp = reduce_signed_polar(r, phi);
        REQUIRE(sp.phi >= 0.0);
        REQUIRE(sp.phi < pi);
        const Vec2 original = r * Vec2(std::cos(phi), std::sin(phi));
        const Vec2 reduced = sp.r * Vec2(std::cos(sp.phi), std::sin(sp.phi));
        REQUIRE((original - reduced).norm() < 1e-12);
    }
}

TEST_CASE("odt::grid, to_signed_polar round trip", "[grid]") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 300; ++rep) {
        const Vec2 p(g(rng), g(rng));
        const SignedPolar sp = to_signed_polar(p);
        const Vec2 back = sp.r * Vec2(std::cos(sp.phi), std::sin(sp.phi));
        REQUIRE((p - back).norm() < 1e-12);
    }
}
