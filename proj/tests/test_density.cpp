#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stablecf/algebra.hpp"
#include "stablecf/density.hpp"
#include "stablecf/errors.hpp"
#include "stablecf/params.hpp"

using namespace stablecf;

namespace {

double cauchy_pdf(double x) { return 1.0 / (kPi * (1.0 + x * x)); }

double normal_pdf(double x, double sdev) {
    return std::exp(-0.5 * x * x / (sdev * sdev)) / (sdev * std::sqrt(2.0 * kPi));
}

// one-sided density with support edge at `edge`, unit scale
double levy_pdf(double x, double edge) {
    const double s = x - edge;
    if (s <= 0.0) return 0.0;
    return std::sqrt(1.0 / (2.0 * kPi)) * std::exp(-0.5 / s) / std::pow(s, 1.5);
}

double trapezoid_mass(const DensityGrid& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < g.values.size(); ++i)
        acc += 0.5 * (g.values[i] + g.values[i + 1]) * g.dx;
    return acc;
}

}  // namespace

TEST_CASE("standard Cauchy density from its characteristic function") {
    const StableParams p{1.0, 0.0, 1.0, 0.0};
    const DensityGrid g = pdf_from_cf(p, -8.0, 8.0, 1024);

    double worst = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        worst = std::max(worst, std::fabs(g.values[i] - cauchy_pdf(g.x_at(i))));
    CHECK(worst < 1e-4);

    CHECK(g.x_at(512) == 0.0);
    CHECK(g.values[512] == Catch::Approx(1.0 / kPi).margin(2e-5));
    CHECK(g.values[512] == Catch::Approx(0.31831).margin(1e-4));

    const double mass = (std::atan(8.0) - std::atan(-8.0)) / kPi;
    CHECK(trapezoid_mass(g) == Catch::Approx(mass).margin(1e-3));
}

TEST_CASE("Gaussian density from its characteristic function") {
    // gamma = 0.70711 is within rounding of a unit-variance Gaussian
    const StableParams p{2.0, 0.0, 0.70711, 0.0};
    const DensityGrid g = pdf_from_cf(p, -8.0, 8.0, 1024);
    const double sdev = p.gamma * std::sqrt(2.0);

    double worst = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        worst = std::max(worst, std::fabs(g.values[i] - normal_pdf(g.x_at(i), sdev)));
    CHECK(worst < 1e-4);

    CHECK(g.x_at(512) == 0.0);
    CHECK(g.values[512] == Catch::Approx(0.39894).margin(1e-4));

    const double mass = std::erf(8.0 / (sdev * std::sqrt(2.0)));
    CHECK(trapezoid_mass(g) == Catch::Approx(mass).margin(1e-3));
}

TEST_CASE("one-sided heavy-tailed density pins down the support edge") {
    // S(0.5, 1, 1, 0): fully skewed, support starts at delta - gamma = -1
    const StableParams p{0.5, 1.0, 1.0, 0.0};
    const DensityGrid g = pdf_from_cf(p, -2.0, 20.0, 4096);

    double worst = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        worst = std::max(worst, std::fabs(g.values[i] - levy_pdf(g.x_at(i), -1.0)));
    CHECK(worst < 1e-3);

    // one unit above the edge the closed form gives e^{-1/2}/sqrt(2 pi)
    const auto near_zero = static_cast<std::size_t>(std::llround((0.0 - g.x0) / g.dx));
    CHECK(std::fabs(g.x_at(near_zero)) < g.dx);
    CHECK(g.values[near_zero] == Catch::Approx(0.24197).margin(1e-3));

    // left of the edge the inverted density vanishes
    for (std::size_t i = 0; g.x_at(i) < -1.05; ++i) CHECK(g.values[i] < 2e-4);

    const double x_hi = g.x_at(g.values.size() - 1);
    const double mass = std::erfc(std::sqrt(0.5 / (x_hi + 1.0)));
    CHECK(trapezoid_mass(g) == Catch::Approx(mass).margin(1e-3));
}

TEST_CASE("symmetric laws invert to densities symmetric about the shift") {
    const StableParams p{1.5, 0.0, 1.0, 0.0};
    const DensityGrid g = pdf_from_cf(p, -10.0, 10.0, 256);
    // samples at +-k dx mirror around the x = 0 sample
    for (std::size_t k = 1; k < 128; ++k)
        CHECK(std::fabs(g.values[128 + k] - g.values[128 - k]) < 1e-6);
}

TEST_CASE("affine transforms carry through the inversion") {
    const StableParams p{1.5, 0.5, 1.0, 0.0};
    const StableParams q = scale_shift(p, 2.0, 1.0);
    // matched grids: x on the q side maps to (x - 1) / 2 on the p side
    const DensityGrid gp = pdf_from_cf(p, -5.0, 5.0, 256);
    const DensityGrid gq = pdf_from_cf(q, -9.0, 11.0, 256);
    for (std::size_t i = 0; i < 256; ++i) {
        CHECK(gq.x_at(i) == Catch::Approx(2.0 * gp.x_at(i) + 1.0).margin(1e-12));
        CHECK(std::fabs(gq.values[i] - gp.values[i] / 2.0) < 1e-4);
    }
}

TEST_CASE("density grid input validation") {
    const StableParams p{1.5, 0.0, 1.0, 0.0};
    CHECK_THROWS_AS(pdf_from_cf({1.5, 0.0, 0.0, 2.0}, -1.0, 1.0, 256), DegenerateDistribution);
    CHECK_THROWS_AS(pdf_from_cf(p, 3.0, -3.0, 256), InvalidParams);
    CHECK_THROWS_AS(pdf_from_cf(p, -1.0, 1.0, 100), InvalidParams);   // not a power of two
    CHECK_THROWS_AS(pdf_from_cf(p, -1.0, 1.0, 32), InvalidParams);    // below minimum
    CHECK_THROWS_AS(pdf_from_cf(p, -1.0, 1.0, 8192), InvalidParams);  // above maximum
    // a scale this tiny needs more tail nodes than the documented cap
    CHECK_THROWS_AS(pdf_from_cf({1.5, 0.0, 1e-6, 0.0}, -1.0, 1.0, 256), NumericalError);
}
