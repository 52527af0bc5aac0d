#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "stablecf/errors.hpp"

namespace stablecf {

using ComplexValue = std::complex<double>;

// One alpha-stable marginal S(alpha, beta, gamma, delta): characteristic
// exponent in (0, 2], skew in [-1, 1], scale >= 0, shift. gamma == 0 is the
// degenerate point mass at delta; it is legal everywhere and its
// characteristic function is exp(i t delta).
struct StableParams {
    double alpha = 2.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
};

// The same distribution in the coordinates every linear-model operation is
// affine in: u = gamma^alpha, v = beta * gamma^alpha, w = delta. Iterative
// solvers work here and convert back once at the end.
struct TransformedParams {
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Slack allowed on |beta| when mapping solver output back to a skew, before
// declaring the result nonphysical.
inline constexpr double kSkewSlack = 1e-9;

// Width of the exact alpha == 1 branch. Values this close to 1 take the
// logarithmic form of the characteristic function.
inline constexpr double kLogBranchWidth = 1e-12;

inline bool log_branch(double alpha) { return std::fabs(alpha - 1.0) < kLogBranchWidth; }

// tan(pi alpha / 2) blows up as alpha -> 1, so shift corrections lose digits
// in a narrow band around 1 without being on the exact branch. Not an error;
// ingestion points surface it as a warning.
inline bool ill_conditioned_alpha(double alpha) {
    return alpha > 0.99 && alpha < 1.01 && !log_branch(alpha);
}

// tan(pi alpha / 2); exactly zero at alpha == 2, where the skew term drops
// out of the characteristic function and tan(pi) would otherwise leave
// rounding noise in every shift correction.
inline double skew_tangent(double alpha) {
    if (alpha == 2.0) return 0.0;
    return std::tan(0.5 * kPi * alpha);
}

// sign with sign(0) = 0, the convention all closed forms below assume.
inline double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// x * log(x) extended by its limit 0 at x = 0.
inline double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

inline bool is_point_mass(const StableParams& p) { return p.gamma == 0.0; }

inline void validate(const StableParams& p) {
    if (!(std::isfinite(p.alpha) && std::isfinite(p.beta) && std::isfinite(p.gamma) &&
          std::isfinite(p.delta))) {
        throw InvalidParams("stable parameters must be finite");
    }
    if (!(p.alpha > 0.0 && p.alpha <= 2.0)) {
        throw InvalidParams("alpha must lie in (0, 2], got " + std::to_string(p.alpha));
    }
    if (!(p.beta >= -1.0 && p.beta <= 1.0)) {
        throw InvalidParams("beta must lie in [-1, 1], got " + std::to_string(p.beta));
    }
    if (!(p.gamma >= 0.0)) {
        throw InvalidParams("gamma must be >= 0, got " + std::to_string(p.gamma));
    }
}

// N(mean, sdev^2) embeds as S(2, 0, sdev / sqrt(2), mean).
inline StableParams make_gaussian(double mean, double sdev) {
    if (!(std::isfinite(mean) && std::isfinite(sdev)) || sdev <= 0.0) {
        throw InvalidParams("gaussian requires finite mean and sdev > 0");
    }
    return {2.0, 0.0, sdev / std::sqrt(2.0), mean};
}

inline StableParams make_cauchy(double scale, double shift) {
    StableParams p{1.0, 0.0, scale, shift};
    validate(p);
    return p;
}

// Fully right-skewed alpha = 1/2 law. In this parameterization its support
// starts at delta - gamma, not at delta.
inline StableParams make_levy(double scale, double shift) {
    StableParams p{0.5, 1.0, scale, shift};
    validate(p);
    return p;
}

inline TransformedParams to_transformed(const StableParams& p) {
    validate(p);
    const double u = std::pow(p.gamma, p.alpha);
    return {u, p.beta * u, p.delta};
}

// Inverse of to_transformed for a fixed alpha. Solver output can carry a
// skew ratio slightly outside [-1, 1]; within kSkewSlack it is clamped,
// beyond that the state does not describe any stable law.
inline StableParams from_transformed(const TransformedParams& t, double alpha) {
    if (!(std::isfinite(t.u) && std::isfinite(t.v) && std::isfinite(t.w))) {
        throw NumericalError("transformed parameters must be finite");
    }
    if (t.u < 0.0) {
        throw NonphysicalScale("gamma^alpha = " + std::to_string(t.u) +
                               " < 0: no stable distribution matches");
    }
    if (t.u == 0.0) {
        if (t.v != 0.0) {
            throw NonphysicalSkew("zero scale with nonzero skew weight " + std::to_string(t.v));
        }
        return {alpha, 0.0, 0.0, t.w};
    }
    double beta = t.v / t.u;
    if (std::fabs(beta) > 1.0 + kSkewSlack) {
        throw NonphysicalSkew("skew " + std::to_string(beta) + " outside [-1, 1]");
    }
    beta = std::clamp(beta, -1.0, 1.0);
    return {alpha, beta, std::pow(t.u, 1.0 / alpha), t.w};
}

}  // namespace stablecf
