#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stablecf/errors.hpp"
#include "stablecf/matrix.hpp"
#include "stablecf/params.hpp"
#include "stablecf/spectral.hpp"

// The linear stable model Y = AX (+Z). A model file stores the marginals of
// exactly one side: x-side parameters (optionally with noise) describe the
// sources and feed the forward direction, y-side parameters describe the
// observations and feed inference.

namespace stablecf {

enum class Side { x, y };

inline const char* side_name(Side s) { return s == Side::x ? "x" : "y"; }

struct LinearStableModel {
    double alpha = 2.0;
    std::vector<std::string> labels;
    Matrix A;
    Side side = Side::x;
    std::vector<StableParams> params;                // marginals of the stored side
    std::optional<std::vector<StableParams>> noise;  // z marginals, x-side only

    Eigen::Index n() const { return A.rows(); }
};

inline void validate_model(const LinearStableModel& m) {
    validate({m.alpha, 0.0, 1.0, 0.0});
    if (m.A.rows() != m.A.cols()) throw ModelShapeError("coefficient matrix must be square");
    const Eigen::Index n = m.A.rows();
    if (n < 1) throw ModelShapeError("model needs at least one variable");
    if (!m.A.allFinite()) throw InvalidParams("coefficient matrix has non-finite entries");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (m.A.row(i).cwiseAbs().maxCoeff() == 0.0)
            throw ModelShapeError("row " + std::to_string(i) + " of A is all zero");
        if (m.A.col(i).cwiseAbs().maxCoeff() == 0.0)
            throw ModelShapeError("column " + std::to_string(i) + " of A is all zero");
    }
    if (static_cast<Eigen::Index>(m.labels.size()) != n)
        throw ModelShapeError("expected " + std::to_string(n) + " labels, got " +
                              std::to_string(m.labels.size()));
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        if (m.labels[i].empty())
            throw ModelShapeError("label " + std::to_string(i) + " is empty");
    }
    auto check_side = [&](const std::vector<StableParams>& ps, const char* what) {
        if (static_cast<Eigen::Index>(ps.size()) != n)
            throw ModelShapeError(std::string(what) + ": expected " + std::to_string(n) +
                                  " parameter rows, got " + std::to_string(ps.size()));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            validate(ps[i]);
            if (ps[i].alpha != m.alpha)
                throw AlphaMismatch(std::string(what) + " row " + std::to_string(i) +
                                    " has alpha " + std::to_string(ps[i].alpha) +
                                    ", model has " + std::to_string(m.alpha));
        }
    };
    check_side(m.params, m.side == Side::x ? "x params" : "y params");
    if (m.noise) {
        if (m.side != Side::x)
            throw UnsupportedFeature("noise parameters only combine with x-side marginals");
        check_side(*m.noise, "noise params");
    }
}

inline ConvergenceReport check_convergence_conditions(const LinearStableModel& m,
                                                      double tol = 1e-6) {
    validate_model(m);
    return check_convergence_conditions(m.A, m.alpha, tol);
}

}  // namespace stablecf
