#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stablecf/algebra.hpp"
#include "stablecf/errors.hpp"
#include "stablecf/exact.hpp"
#include "stablecf/model.hpp"
#include "stablecf/params.hpp"

// Brute-force cross-checks for the closed-form algebra. Each oracle compares
// a quantity computed through the parameter algebra against the same quantity
// assembled directly from characteristic-function arithmetic, over a fixed
// grid, and reports the worst deviation. The grids are deliberately frozen so
// a failure reproduces bit for bit.

namespace stablecf {

struct OracleReport {
    double max_abs_err = 0.0;
    double argmax_t_or_x = 0.0;  // grid point where the worst deviation occurred
    std::string grid_spec;
};

// |cf(add(p1, p2), t) - cf(p1, t) cf(p2, t)| over t in [-10, 10] step 0.05.
// Addition of independent variables must multiply characteristic functions;
// this is the ground truth the shift corrections in add() are held to.
inline OracleReport convolution_oracle(const StableParams& p1, const StableParams& p2) {
    validate(p1);
    validate(p2);
    if (p1.alpha != p2.alpha)
        throw AlphaMismatch("convolution oracle needs a common alpha, got " +
                            std::to_string(p1.alpha) + " and " + std::to_string(p2.alpha));
    if (is_point_mass(p1) || is_point_mass(p2))
        throw InvalidParams("convolution oracle needs nondegenerate inputs");

    const StableParams sum = add(p1, p2);
    OracleReport rep;
    rep.grid_spec = "t in [-10, 10] step 0.05 (401 points)";
    for (int k = -200; k <= 200; ++k) {
        const double t = 0.05 * k;
        const double err = std::abs(cf_eval(sum, t) - cf_eval(p1, t) * cf_eval(p2, t));
        if (err > rep.max_abs_err) {
            rep.max_abs_err = err;
            rep.argmax_t_or_x = t;
        }
    }
    return rep;
}

// Validates the closed-form forward/posterior pair on a 2-variable model
// against direct slices of the joint characteristic function.
//
// With independent sources, the joint cf factorizes and the observation
// marginals come from slicing it along the rows of A:
//
//   cf_{Y_i}(t) = cf_X(A^T e_i t) = prod_j cf_{X_j}(A_ij t)
//
// which uses no parameter algebra at all. Stage one compares forward_params
// output against these product slices; stage two feeds the forward output to
// posterior_params and compares the recovered sources against the priors
// (exactly what the noise-free posterior must reproduce). Worst deviation
// across both stages is reported, t in [-5, 5] step 0.05.
inline OracleReport slicing_oracle_2var(double alpha, const Matrix& a,
                                        const std::vector<StableParams>& x_params) {
    if (a.rows() != 2 || a.cols() != 2)
        throw ModelShapeError("slicing oracle is defined for 2x2 models");
    if (x_params.size() != 2) throw ModelShapeError("slicing oracle needs 2 source parameters");
    for (const StableParams& p : x_params) {
        validate(p);
        if (p.alpha != alpha)
            throw AlphaMismatch("slicing oracle: source alpha " + std::to_string(p.alpha) +
                                " disagrees with " + std::to_string(alpha));
    }

    LinearStableModel model;
    model.alpha = alpha;
    model.labels = {"x1", "x2"};
    model.A = a;
    model.side = Side::x;
    model.params = x_params;
    const std::vector<StableParams> y = forward_params(model);

    OracleReport rep;
    rep.grid_spec = "t in [-5, 5] step 0.05 (201 points), forward slice then posterior stage";
    auto track = [&rep](double err, double t) {
        if (err > rep.max_abs_err) {
            rep.max_abs_err = err;
            rep.argmax_t_or_x = t;
        }
    };

    for (int k = -100; k <= 100; ++k) {
        const double t = 0.05 * k;
        for (int i = 0; i < 2; ++i) {
            const ComplexValue sliced =
                cf_eval(x_params[0], a(i, 0) * t) * cf_eval(x_params[1], a(i, 1) * t);
            track(std::abs(cf_eval(y[static_cast<std::size_t>(i)], t) - sliced), t);
        }
    }

    LinearStableModel observed = model;
    observed.side = Side::y;
    observed.params = y;
    // a singular A surfaces here as the solver's singular-matrix error
    const PosteriorResult post = posterior_params(observed);
    for (int k = -100; k <= 100; ++k) {
        const double t = 0.05 * k;
        for (int i = 0; i < 2; ++i) {
            track(std::abs(cf_eval(post.x_given_y[static_cast<std::size_t>(i)], t) -
                           cf_eval(x_params[static_cast<std::size_t>(i)], t)),
                  t);
        }
    }
    return rep;
}

}  // namespace stablecf
