#pragma once

#include <cmath>
#include <string>

#include "stablecf/errors.hpp"
#include "stablecf/params.hpp"

// Closed-form algebra of the stable family: affine transforms, sums of
// independent variables, and characteristic function evaluation. Everything
// downstream (exact inference, the iterative solvers, the tree passes) is
// built from these three operations, so their mutual consistency is pinned
// by characteristic-function identities in the test suite:
//
//   cf(aX + b, t) = exp(i t b) cf(X, a t)
//   cf(X1 + X2, t) = cf(X1, t) cf(X2, t)

namespace stablecf {

// aX + b for X ~ S(alpha, beta, gamma, delta):
//   S(alpha, sign(a) beta, |a| gamma, a delta + b).
// Exact in this parameterization for every alpha, including alpha = 1 (the
// log(gamma |t|) form absorbs the scaling, no extra shift appears).
// a = 0 collapses to the point mass at b.
inline StableParams scale_shift(const StableParams& p, double a, double b) {
    validate(p);
    if (!(std::isfinite(a) && std::isfinite(b))) {
        throw InvalidParams("scale_shift requires finite a, b");
    }
    if (a == 0.0) return {p.alpha, 0.0, 0.0, b};
    return {p.alpha, sign_of(a) * p.beta, std::fabs(a) * p.gamma, a * p.delta + b};
}

// Shift correction entering the sum of two independent stables. The summed
// skew/scale parameters do not add in delta directly; the difference between
// the combined skew weight and the operands' shows up as a shift:
//   alpha != 1:  tan(pi alpha/2) [beta gamma - beta1 gamma1 - beta2 gamma2]
//   alpha == 1:  (2/pi) [bg log g - b1 g1 log g1 - b2 g2 log g2]
inline double sum_shift_correction(double alpha, double beta, double gamma, double beta1,
                                   double gamma1, double beta2, double gamma2) {
    if (log_branch(alpha)) {
        return (2.0 / kPi) *
               (beta * xlogx(gamma) - beta1 * xlogx(gamma1) - beta2 * xlogx(gamma2));
    }
    return skew_tangent(alpha) * (beta * gamma - beta1 * gamma1 - beta2 * gamma2);
}

// X1 + X2 for independent stables sharing alpha. In transformed coordinates
// u and v add; delta picks up the shift correction above. A point mass acts
// as the identity up to a shift of delta, and is the one case where the two
// alphas may differ (the point mass has no exponent of its own).
inline StableParams add(const StableParams& p1, const StableParams& p2) {
    validate(p1);
    validate(p2);
    if (is_point_mass(p2)) return {p1.alpha, p1.beta, p1.gamma, p1.delta + p2.delta};
    if (is_point_mass(p1)) return {p2.alpha, p2.beta, p2.gamma, p1.delta + p2.delta};
    if (p1.alpha != p2.alpha) {
        throw AlphaMismatch("cannot add stables with alpha " + std::to_string(p1.alpha) +
                            " and " + std::to_string(p2.alpha));
    }
    const double alpha = p1.alpha;
    const double u1 = std::pow(p1.gamma, alpha), u2 = std::pow(p2.gamma, alpha);
    const double u = u1 + u2;
    const double beta = (p1.beta * u1 + p2.beta * u2) / u;
    const double gamma = std::pow(u, 1.0 / alpha);
    const double xi =
        sum_shift_correction(alpha, beta, gamma, p1.beta, p1.gamma, p2.beta, p2.gamma);
    return {alpha, beta, gamma, p1.delta + p2.delta + xi};
}

// E[exp(i t X)] for X ~ S(alpha, beta, gamma, delta). Derived by pushing the
// normalized law Z through X = gamma (Z - beta tan(pi alpha/2)) + delta
// (alpha != 1) resp. X = gamma Z + delta (alpha == 1):
//   alpha != 1: exp(-g^a |t|^a + i [delta t + beta tan(pi a/2)
//                                   (sign(t) g^a |t|^a - gamma t)])
//   alpha == 1: exp(-g |t| + i [delta t - (2/pi) beta g t log(g |t|)])
inline ComplexValue cf_eval(const StableParams& p, double t) {
    validate(p);
    if (!std::isfinite(t)) throw InvalidParams("cf argument must be finite");
    if (t == 0.0) return {1.0, 0.0};
    if (is_point_mass(p)) return std::exp(ComplexValue(0.0, p.delta * t));
    const double at = std::fabs(t);
    if (log_branch(p.alpha)) {
        const double re = -p.gamma * at;
        const double im = p.delta * t - (2.0 / kPi) * p.beta * p.gamma * t * std::log(p.gamma * at);
        return std::exp(ComplexValue(re, im));
    }
    const double u = std::pow(p.gamma, p.alpha);
    const double ua = u * std::pow(at, p.alpha);
    const double im =
        p.delta * t + skew_tangent(p.alpha) * p.beta * (sign_of(t) * ua - p.gamma * t);
    return std::exp(ComplexValue(-ua, im));
}

// Characteristic function of the normalized law Z(alpha, beta) every stable
// variable is an affine image of:
//   alpha != 1: exp(-|t|^a [1 - i beta tan(pi a/2) sign(t)])
//   alpha == 1: exp(-|t| [1 + i beta (2/pi) sign(t) log |t|])
inline ComplexValue cf_eval_standard(double alpha, double beta, double t) {
    validate({alpha, beta, 1.0, 0.0});
    if (!std::isfinite(t)) throw InvalidParams("cf argument must be finite");
    if (t == 0.0) return {1.0, 0.0};
    const double at = std::fabs(t);
    if (log_branch(alpha)) {
        return std::exp(
            ComplexValue(-at, -(2.0 / kPi) * beta * sign_of(t) * at * std::log(at)));
    }
    const double aa = std::pow(at, alpha);
    return std::exp(ComplexValue(-aa, skew_tangent(alpha) * beta * sign_of(t) * aa));
}

}  // namespace stablecf
