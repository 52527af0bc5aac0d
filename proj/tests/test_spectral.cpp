#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stablecf/errors.hpp"
#include "stablecf/matrix.hpp"
#include "stablecf/spectral.hpp"
#include "helpers.hpp"

using namespace stablecf;

namespace {

// the three-user communication example used throughout the solver tests
Matrix cdma3() {
    Matrix a(3, 3);
    a << 7.0, -1.0, 3.0,
         -1.0, 7.0, 5.0,
         3.0, -5.0, 7.0;
    return a / 7.0;
}

}  // namespace

TEST_CASE("spectral radius on closed-form cases") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = -2.5;
    d(1, 1) = 0.5;
    d(2, 2) = 1.0;
    CHECK(companion_spectral_radius(d) == Catch::Approx(2.5).margin(1e-9));

    // strictly triangular is nilpotent
    Matrix t = Matrix::Zero(3, 3);
    t(0, 1) = 4.0;
    t(0, 2) = -1.0;
    t(1, 2) = 2.0;
    CHECK(companion_spectral_radius(t) == Catch::Approx(0.0).margin(1e-9));

    // rotation by 90 degrees has both eigenvalues on the unit circle
    Matrix r(2, 2);
    r << 0.0, -1.0, 1.0, 0.0;
    CHECK(companion_spectral_radius(r) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("spectral radius properties on random matrices") {
    auto g = testutil::rng(11);
    const double tol = 1e-6;
    for (int rep = 0; rep < 8; ++rep) {
        Matrix m(5, 5);
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < 5; ++j) m(i, j) = testutil::uniform(g, -2.0, 2.0);
        const double c = testutil::uniform(g, -3.0, 3.0);
        const double rho = spectral_radius(m, tol);
        CHECK(spectral_radius(c * m, tol) ==
              Catch::Approx(std::fabs(c) * rho).margin(2.0 * tol * (1.0 + rho)));

        // triangular part has the diagonal as its spectrum
        Matrix upper = m.triangularView<Eigen::Upper>();
        CHECK(spectral_radius(upper, tol) ==
              Catch::Approx(upper.diagonal().cwiseAbs().maxCoeff()).margin(tol));
    }
}

TEST_CASE("three-user matrix reproduces the known iteration radii") {
    const Matrix a = cdma3();
    const Matrix r = Matrix::Identity(3, 3) - a;

    CHECK(spectral_radius(entrywise_abs_pow(r, 1.0)) == Catch::Approx(0.9008).margin(1e-3));
    CHECK(spectral_radius(entrywise_abs_pow(r, 1.5)) == Catch::Approx(0.6875).margin(1e-3));
}

TEST_CASE("power iteration agrees with the companion route just past the cutover") {
    auto g = testutil::rng(17);
    for (int rep = 0; rep < 6; ++rep) {
        // symmetric matrices keep the spectrum real so the large-n path and
        // the small-n path can be compared through a padded embedding
        Matrix s(8, 8);
        for (Eigen::Index i = 0; i < 8; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                s(i, j) = testutil::uniform(g, -1.0, 1.0);
                s(j, i) = s(i, j);
            }
        const double exact = companion_spectral_radius(s);

        Matrix padded = Matrix::Zero(9, 9);
        padded.topLeftCorner(8, 8) = s;
        CHECK(spectral_radius(padded, 1e-9) == Catch::Approx(exact).margin(1e-6));
    }
}

TEST_CASE("convergence report evaluates both iteration conditions") {
    SECTION("identity model converges trivially") {
        const auto rep = check_convergence_conditions(Matrix::Identity(5, 5), 1.5);
        CHECK(rep.rho_R == Catch::Approx(0.0).margin(1e-9));
        CHECK(rep.rho_absR_alpha == Catch::Approx(0.0).margin(1e-9));
        CHECK(rep.ok());
        CHECK_FALSE(rep.normalized);
    }

    SECTION("three-user matrix satisfies both conditions at alpha 1.5") {
        const auto rep = check_convergence_conditions(cdma3(), 1.5);
        CHECK_FALSE(rep.normalized);  // diagonal entries are exactly 7/7
        CHECK(rep.rho_absR_alpha == Catch::Approx(0.6875).margin(1e-3));
        // signed R has eigenvalues {0, +-i sqrt(15)/7}
        CHECK(rep.rho_R == Catch::Approx(std::sqrt(15.0) / 7.0).margin(1e-6));
        CHECK(rep.condition1_holds);
        CHECK(rep.condition2_holds);
        CHECK(rep.ok());
    }

    SECTION("strong symmetric coupling fails the entrywise condition at alpha 2") {
        Matrix a(2, 2);
        a << 1.0, 2.0, 2.0, 1.0;
        const auto rep = check_convergence_conditions(a, 2.0);
        CHECK(rep.rho_absR_alpha == Catch::Approx(4.0).margin(1e-6));
        CHECK_FALSE(rep.condition1_holds);
        CHECK_FALSE(rep.ok());
    }

    SECTION("strong coupling fails the entrywise condition at small alpha") {
        // |R|^alpha grows entrywise as alpha decreases below 1
        const auto rep = check_convergence_conditions(cdma3(), 0.3);
        CHECK(rep.condition2_holds);  // rho(R) does not depend on alpha
        CHECK_FALSE(rep.condition1_holds);
    }

    SECTION("rescaled diagonal is reported") {
        const auto rep = check_convergence_conditions(4.0 * Matrix::Identity(3, 3), 1.5);
        CHECK(rep.normalized);
        CHECK(rep.ok());
    }
}

TEST_CASE("spectral helpers reject malformed input") {
    CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), ModelShapeError);
    CHECK_THROWS_AS(check_convergence_conditions(Matrix::Zero(3, 2), 1.5), ModelShapeError);
    CHECK_THROWS_AS(check_convergence_conditions(Matrix::Identity(2, 2), 2.5), InvalidParams);
}
