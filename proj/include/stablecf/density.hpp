#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "stablecf/algebra.hpp"
#include "stablecf/errors.hpp"
#include "stablecf/params.hpp"

// Numeric density recovery: invert the characteristic function on an evenly
// spaced grid by direct quadrature of
//
//   f(x) = (1/pi) Integral_0^T Re[ exp(-i t x) phi(t) ] dt
//
// Direct quadrature (instead of an FFT) keeps the grid free of wrap-around
// artifacts and lets T and the step be chosen from the tail bound
// |phi(t)| = exp(-gamma^alpha t^alpha) alone.

namespace stablecf {

// Samples live at x0 + i*dx for i in [0, values.size()); the right endpoint
// of the requested range is excluded so power-of-two grids over symmetric
// ranges sample x = 0 exactly.
struct DensityGrid {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> values;

    double x_at(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
};

// Quadrature knobs, all documented here rather than tunable: T is chosen so
// |phi(T)| < 1e-10 (exp(-23.03) ~ 9.9e-11); the oscillatory segment resolves
// the fastest phase t*x with 24 nodes per wavelength; the [0, 1] segment is
// integrated under the substitution t = s^m with m = ceil(4/alpha) so that
// t^alpha (not C^4 at 0 for fractional alpha) becomes smooth enough for
// Simpson weights.
inline constexpr double kCfTailLog = 23.03;
inline constexpr int kNodesPerWavelength = 24;
inline constexpr std::size_t kHeadNodes = 2048;
inline constexpr std::size_t kMaxTailNodes = std::size_t{1} << 20;
inline constexpr std::size_t kMinDensityPoints = 64;
inline constexpr std::size_t kMaxDensityPoints = 4096;
inline constexpr double kNegativeDensityTol = 1e-6;

namespace detail {

// Composite Simpson values for an even interval count.
inline double simpson_weight(std::size_t k, std::size_t last) {
    if (k == 0 || k == last) return 1.0;
    return (k % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace detail

inline DensityGrid pdf_from_cf(const StableParams& p, double x_min, double x_max,
                               std::size_t n) {
    validate(p);
    if (is_point_mass(p)) {
        throw DegenerateDistribution("point mass at " + std::to_string(p.delta) +
                                     " has no density");
    }
    if (!(x_min < x_max)) throw InvalidParams("density grid needs x_min < x_max");
    if (n < kMinDensityPoints || n > kMaxDensityPoints || (n & (n - 1)) != 0) {
        throw InvalidParams("density grid size must be a power of two in [64, 4096], got " +
                            std::to_string(n));
    }

    const double u = std::pow(p.gamma, p.alpha);
    const double cutoff = std::pow(kCfTailLog / u, 1.0 / p.alpha);
    const double x_scale = std::max({std::fabs(x_min), std::fabs(x_max), 1.0});

    DensityGrid grid;
    grid.x0 = x_min;
    grid.dx = (x_max - x_min) / static_cast<double>(n);
    grid.values.assign(n, 0.0);

    // head segment [0, min(1, T)] under t = s^m
    const double t_split = std::min(1.0, cutoff);
    const int m = static_cast<int>(std::ceil(4.0 / p.alpha));
    const double s_hi = std::pow(t_split, 1.0 / m);
    {
        const double ds = s_hi / static_cast<double>(kHeadNodes);
        std::vector<double> ts(kHeadNodes + 1), jac(kHeadNodes + 1);
        std::vector<ComplexValue> phi(kHeadNodes + 1);
        for (std::size_t k = 0; k <= kHeadNodes; ++k) {
            const double s = ds * static_cast<double>(k);
            const double t = std::pow(s, m);
            ts[k] = t;
            jac[k] = m * std::pow(s, m - 1);
            phi[k] = cf_eval(p, t);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x_at(i);
            double acc = 0.0;
            for (std::size_t k = 0; k <= kHeadNodes; ++k) {
                const double w = detail::simpson_weight(k, kHeadNodes);
                const double ph = ts[k] * x;
                acc += w * jac[k] *
                       (phi[k].real() * std::cos(ph) + phi[k].imag() * std::sin(ph));
            }
            grid.values[i] = acc * ds / 3.0;
        }
    }

    // oscillatory tail [t_split, T], uniform Simpson with phase recurrences
    if (cutoff > t_split) {
        const double span = cutoff - t_split;
        std::size_t kt = static_cast<std::size_t>(
            std::ceil(span * x_scale * kNodesPerWavelength / (2.0 * kPi)));
        kt = std::max<std::size_t>(kt, 512);
        if (kt > kMaxTailNodes) {
            throw NumericalError(
                "cf tail requires " + std::to_string(kt) +
                " quadrature nodes (scale too small for this grid span)");
        }
        if (kt % 2 == 1) ++kt;
        const double dt = span / static_cast<double>(kt);
        std::vector<ComplexValue> phi(kt + 1);
        for (std::size_t k = 0; k <= kt; ++k) {
            phi[k] = cf_eval(p, t_split + dt * static_cast<double>(k));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x_at(i);
            // e^{-i t x} advanced by a unit rotation per node, re-anchored
            // periodically so the recurrence cannot drift
            const ComplexValue step(std::cos(dt * x), -std::sin(dt * x));
            ComplexValue rot(std::cos(t_split * x), -std::sin(t_split * x));
            double acc = 0.0;
            for (std::size_t k = 0; k <= kt; ++k) {
                if (k % 1024 == 0) {
                    const double t = t_split + dt * static_cast<double>(k);
                    rot = ComplexValue(std::cos(t * x), -std::sin(t * x));
                }
                acc += detail::simpson_weight(k, kt) *
                       (phi[k].real() * rot.real() - phi[k].imag() * rot.imag());
                rot *= step;
            }
            grid.values[i] += acc * dt / 3.0;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        double& d = grid.values[i];
        d /= kPi;
        if (d < 0.0) {
            if (d < -kNegativeDensityTol) {
                throw NumericalError("inversion produced density " + std::to_string(d) +
                                     " at x = " + std::to_string(grid.x_at(i)));
            }
            d = 0.0;
        }
    }
    return grid;
}

// Two columns, full double precision, one sample per line.
inline std::string density_to_csv(const DensityGrid& grid) {
    std::string out = "x,density\n";
    char buf[80];
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.x_at(i), grid.values[i]);
        out += buf;
    }
    return out;
}

}  // namespace stablecf
