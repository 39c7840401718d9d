// Ellipsoid phantom model and its analytic Fourier transform, cross-checked
// against direct numerical quadrature.
#include "support/oracles.hpp"

#include <odt/errors.hpp>
#include <odt/phantom.hpp>
#include <odt/so3.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace odt;

TEST_CASE("odt::phantom, validate_phantom rejects bad shapes", "[phantom]") {
    Phantom ph = default_phantom();
    REQUIRE_NOTHROW(validate_phantom(ph));

    Phantom bad = ph;
    bad.support_radius = -1.0;
    REQUIRE_THROWS_AS(validate_phantom(bad), ConfigError);

    bad = ph;
    bad.ellipsoids[0].semi_axes = Vec3(0.0, 0.2, 0.2);
    REQUIRE_THROWS_AS(validate_phantom(bad), ConfigError);

    bad = ph;
    bad.ellipsoids[0].center = Vec3(1.1, 0.0, 0.0); // pokes out of support
    REQUIRE_THROWS_AS(validate_phantom(bad), ConfigError);

    // Negative amplitudes model inclusions and are allowed.
    Phantom neg = ph;
    neg.ellipsoids[0].amplitude = -5.0;
    REQUIRE_NOTHROW(validate_phantom(neg));
}

TEST_CASE("odt::phantom, ball_ft small-argument and zero behavior",
          "[phantom]") {
    // Value at 0 is the normalized ball volume; first zero of the radial
    // profile sits where tan(x) = x, near x = 4.4934.
    REQUIRE(ball_ft(0.0, 1.0) ==
            Catch::Approx(std::pow(2.0 * pi, -1.5) * 4.0 * pi / 3.0)
                .epsilon(1e-10));
    REQUIRE(ball_ft(4.4934094579090641, 1.0) ==
            Catch::Approx(0.0).margin(1e-10));
    // Scaling: the radius enters as ball_ft(rho, s) = s^3 * ball_ft(rho*s, 1).
    REQUIRE(ball_ft(2.0, 0.5) ==
            Catch::Approx(0.125 * ball_ft(1.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("odt::phantom, phantom_ft against quadrature oracle", "[phantom]") {
    const test::QuadratureRule rule = test::gauss_legendre(48);
    const Phantom ph = default_phantom();
    std::vector<test::OracleEllipsoid> parts;
    for (const Ellipsoid &e : ph.ellipsoids) {
        parts.push_back({e.center, e.orientation, e.semi_axes, e.amplitude});
    }
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 40; ++rep) {
        const Vec3 y = 3.0 * Vec3(g(rng), g(rng), g(rng));
        const Complex lib = phantom_ft(ph, y);
        const Complex ora = test::ellipsoid_sum_ft(parts, y, rule);
        REQUIRE(std::abs(lib - ora) < 1e-10 * (1.0 + std::abs(ora)));
    }
}

TEST_CASE("odt::phantom, phantom_ft is Hermitian for real objects",
          "[phantom]") {
    const Phantom ph = default_phantom();
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 50; ++rep) {
        const Vec3 y = 4.0 * Vec3(g(rng), g(rng), g(rng));
        const Complex plus = phantom_ft(ph, y);
        const Complex minus = phantom_ft(ph, -y);
        REQUIRE(std::abs(plus - std::conj(minus)) < 1e-12 * (1.0 + std::abs(plus)));
    }
}

TEST_CASE("odt::phantom, centered ball phantom", "[phantom]") {
    const Phantom ball = centered_ball_phantom(2.0);
    REQUIRE_NOTHROW(validate_phantom(ball));
    // Transform is real, radially symmetric and peaks at zero frequency.
    const Complex at_zero = phantom_ft(ball, Vec3::Zero());
    REQUIRE(at_zero.imag() == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(at_zero.real() ==
            Catch::Approx(2.0 * std::pow(2.0 * pi, -1.5) * 4.0 * pi / 3.0)
                .epsilon(1e-12));
    const Complex a = phantom_ft(ball, Vec3(1.5, 0.0, 0.0));
    const Complex b = phantom_ft(ball, Vec3(0.0, 0.0, 1.5));
    REQUIRE(std::abs(a - b) < 1e-13);
}

TEST_CASE("odt::phantom, default phantom has no accidental symmetry",
          "[phantom]") {
    // nu must differ between a rotation and its mirror-image alignment;
    // otherwise orientation estimation would be ill-posed by construction.
    const Phantom ph = default_phantom();
    const Vec3 y(2.0, 1.0, -1.5);
    const Vec3 y_mirror(2.0, -1.0, -1.5);
    REQUIRE(std::abs(std::abs(phantom_ft(ph, y)) -
                     std::abs(phantom_ft(ph, y_mirror))) > 1e-3);
}
