#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stablecf/matrix.hpp"
#include "stablecf/params.hpp"

// Shared test utilities. Every randomized test seeds its own engine so runs
// are reproducible; seeds are chosen per test case, not shared globally.

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(g);
}

// The four exponents the closed forms branch over: low, log-branch, generic,
// Gaussian.
inline const std::vector<double>& alpha_grid() {
    static const std::vector<double> a = {0.5, 1.0, 1.5, 2.0};
    return a;
}

inline stablecf::StableParams random_params(std::mt19937_64& g, double alpha) {
    return {alpha, uniform(g, -1.0, 1.0), uniform(g, 0.2, 3.0), uniform(g, -5.0, 5.0)};
}

// Unit diagonal plus bounded off-diagonal noise; spread * (n - 1) < 1 keeps
// the matrix strictly diagonally dominant, hence comfortably invertible.
inline stablecf::Matrix diag_dominant_matrix(std::mt19937_64& g, int n, double spread) {
    stablecf::Matrix a = stablecf::Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) a(i, j) = uniform(g, -spread, spread);
    return a;
}

}  // namespace testutil
