#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stablecf/errors.hpp"
#include "stablecf/params.hpp"

// Dense matrix plumbing shared by the inference routines. Entrywise maps keep
// the conventions sign(0) = 0 and 0 * log 0 = 0 so zero couplings drop out of
// every formula instead of poisoning it with NaNs.

namespace stablecf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// |A_ij|^alpha entrywise; zero entries stay exactly zero.
inline Matrix entrywise_abs_pow(const Matrix& a, double alpha) {
    Matrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double v = a(i, j);
            out(i, j) = v == 0.0 ? 0.0 : std::pow(std::fabs(v), alpha);
        }
    }
    return out;
}

// sign(A_ij) |A_ij|^alpha entrywise: the weight skew parameters travel with.
inline Matrix signed_abs_pow(const Matrix& a, double alpha) {
    Matrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double v = a(i, j);
            out(i, j) = v == 0.0 ? 0.0 : sign_of(v) * std::pow(std::fabs(v), alpha);
        }
    }
    return out;
}

// log |A_ij| entrywise with zeros mapped to zero; the result only ever enters
// the alpha = 1 shift corrections multiplied by the same entry, so the
// convention never leaks a spurious term.
inline Matrix entrywise_log_abs(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double v = a(i, j);
            out(i, j) = v == 0.0 ? 0.0 : std::log(std::fabs(v));
        }
    }
    return out;
}

// D^{-1/2} A D^{-1/2} with D = diag(A). Every diagonal entry must be
// strictly positive; the returned scale vector d (the original diagonal)
// lets callers map solutions of the normalized system back:
// x_original_i = d_i^{-1/2} * x_normalized_i acting through scale_shift.
inline std::pair<Matrix, Vector> normalize_unit_diagonal(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw ModelShapeError("normalization requires a square matrix");
    }
    const Eigen::Index n = a.rows();
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = a(i, i);
        if (!(d(i) > 0.0)) {
            throw NormalizationImpossible("diagonal entry " + std::to_string(i) +
                                          " is " + std::to_string(d(i)) +
                                          "; unit-diagonal scaling needs positives");
        }
    }
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = a(i, j) / std::sqrt(d(i) * d(j));
        }
        out(i, i) = 1.0;  // exact, not 1 +/- rounding
    }
    return {std::move(out), std::move(d)};
}

// Undirected adjacency from the off-diagonal sparsity of A (either direction
// counts), each neighbor list in ascending order so traversals are
// deterministic.
inline std::vector<std::vector<int>> build_graph(const Matrix& a) {
    if (a.rows() != a.cols()) throw ModelShapeError("adjacency requires a square matrix");
    const int n = static_cast<int>(a.rows());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && (a(i, j) != 0.0 || a(j, i) != 0.0)) adj[i].push_back(j);
        }
    }
    return adj;
}

}  // namespace stablecf
