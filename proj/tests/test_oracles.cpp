// Self-checks of the independent test oracles: quadrature, Jacobi eigen,
// one-sided Jacobi SVD.  These must hold before the oracles are trusted to
// cross-check the library.
#include "support/analytic_jet.hpp"
#include "support/oracles.hpp"

#include <odt/phantom.hpp>
#include <odt/so3.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace odt;
using namespace odt::test;

TEST_CASE("test::gauss_legendre, integrates polynomials exactly",
          "[oracles]") {
    const QuadratureRule rule = gauss_legendre(8);
    const auto poly = [](double x) {
        return 3.0 * x * x * x * x * x - 2.0 * x * x + 0.5;
    };
    // int_0^2: 3*64/6 - 2*8/3 + 1 = 32 - 16/3 + 1
    const double exact = 32.0 - 16.0 / 3.0 + 1.0;
    REQUIRE(integrate(poly, 0.0, 2.0, rule) == Catch::Approx(exact).epsilon(1e-14));

    // Nodes must be symmetric and weights sum to the interval length.
    double wsum = 0.0;
    for (double w : rule.weights) {
        wsum += w;
    }
    REQUIRE(wsum == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("test::ball_indicator_ft, volume at zero frequency", "[oracles]") {
    const QuadratureRule rule = gauss_legendre(48);
    REQUIRE(ball_indicator_ft(0.0, rule) ==
            Catch::Approx(4.0 * pi / 3.0).epsilon(1e-12));
    // Large-argument values stay bounded by the volume.
    REQUIRE(std::abs(ball_indicator_ft(9.0, rule)) < 4.0 * pi / 3.0);
}

TEST_CASE("test::jacobi_eigen, recovers a planted spectrum", "[oracles]") {
    std::mt19937_64 rng(21);
    const Rotation Q = random_rotation(rng);
    const Vec3 d(-1.5, 0.25, 3.0);
    const Mat3 A = Q * d.asDiagonal() * Q.transpose();
    const EigenOracle eig = jacobi_eigen(A);
    REQUIRE(eig.values(0) == Catch::Approx(-1.5).margin(1e-12));
    REQUIRE(eig.values(1) == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(eig.values(2) == Catch::Approx(3.0).margin(1e-12));
    REQUIRE((eig.vectors.transpose() * eig.vectors - Mat3::Identity())
                .norm() < 1e-12);
    REQUIRE((A * eig.vectors - eig.vectors * eig.values.asDiagonal())
                .norm() < 1e-11);
}

TEST_CASE("test::jacobi_svd, factorization residual", "[oracles]") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
        Mat3 A;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                A(i, j) = g(rng);
            }
        }
        const SvdOracle svd = jacobi_svd(A);
        REQUIRE((svd.U.transpose() * svd.U - Mat3::Identity()).norm() < 1e-12);
        REQUIRE((svd.V.transpose() * svd.V - Mat3::Identity()).norm() < 1e-12);
        REQUIRE(svd.singular(0) >= svd.singular(1));
        REQUIRE(svd.singular(1) >= svd.singular(2));
        REQUIRE(svd.singular(2) >= 0.0);
        REQUIRE((svd.U * svd.singular.asDiagonal() * svd.V.transpose() - A)
                    .norm() < 1e-12);
    }
}

TEST_CASE("test::random_rotation, lands on SO(3)", "[oracles]") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const Rotation R = random_rotation(rng);
        REQUIRE((R.transpose() * R - Mat3::Identity()).norm() < 1e-14);
        REQUIRE(R.determinant() == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("test::phantom_ft_jet, matches the library value and a central "
          "difference",
          "[oracles]") {
    const Phantom ph = default_phantom();
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);

    const double h = 1e-5;
    for (int rep = 0; rep < 40; ++rep) {
        const Vec3 y(coord(rng), coord(rng), coord(rng));
        const FtJet jet = phantom_ft_jet(ph, y);
        REQUIRE(std::abs(jet.value - phantom_ft(ph, y)) < 1e-13);

        for (int axis = 0; axis < 3; ++axis) {
            Vec3 dy = Vec3::Zero();
            dy(axis) = h;
            const Complex fd =
                (phantom_ft(ph, y + dy) - phantom_ft(ph, y - dy)) / (2.0 * h);
            REQUIRE(std::abs(jet.gradient(axis) - fd) < 1e-7);
        }
    }

    // The profile derivative agrees with a central difference across the
    // series/closed-form switch at rho = 0.1.
    for (const double rho : {0.01, 0.09, 0.11, 0.5, 3.0, 7.0}) {
        const double fd = (ball_profile(rho + 1e-6).value -
                           ball_profile(rho - 1e-6).value) /
                          2e-6;
        REQUIRE(ball_profile(rho).derivative == Catch::Approx(fd).margin(1e-9));
    }
}
