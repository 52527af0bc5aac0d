#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "stablecf/errors.hpp"
#include "stablecf/matrix.hpp"

// Spectral radius estimation and the two iteration-convergence conditions for
// the fixed-point solvers: with R = I - A (A scaled to unit diagonal), the
// scale and skew sweeps contract when rho(|R|^alpha) < 1 and the shift sweep
// when rho(R) < 1.

namespace stablecf {

// Power iteration ran out of restarts; carries the last estimate, which the
// caller may still treat as a rough magnitude.
class SpectralEstimateUnconverged : public NumericalError {
  public:
    SpectralEstimateUnconverged(const std::string& what, double last)
        : NumericalError(what), last_estimate_(last) {}
    double last_estimate() const { return last_estimate_; }

  private:
    double last_estimate_;
};

namespace detail {

// Characteristic polynomial coefficients of a (monic, c[0] multiplies
// lambda^{n-1}) by the trace recurrence M_{k+1} = A (M_k + c_k I).
inline std::vector<double> charpoly_coeffs(const Matrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<double> c(static_cast<std::size_t>(n));
    Matrix m = a;
    c[0] = -m.trace();
    for (Eigen::Index k = 1; k < n; ++k) {
        m = a * (m + c[static_cast<std::size_t>(k - 1)] * Matrix::Identity(n, n));
        c[static_cast<std::size_t>(k)] = -m.trace() / static_cast<double>(k + 1);
    }
    return c;
}

// All roots of the monic polynomial with the given coefficients by
// simultaneous (Durand-Kerner) iteration; deterministic start on a circle
// bounded by the Cauchy root bound.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
    const std::size_t n = c.size();
    double bound = 0.0;
    for (double ck : c) bound = std::max(bound, std::fabs(ck));
    bound += 1.0;
    std::vector<std::complex<double>> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ang = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n) + 0.4;
        z[i] = bound * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    auto eval = [&](std::complex<double> x) {
        std::complex<double> acc(1.0, 0.0);
        for (double ck : c) acc = acc * x + ck;
        return acc;
    };
    for (int iter = 0; iter < 500; ++iter) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) denom *= z[i] - z[j];
            }
            if (denom == std::complex<double>(0.0, 0.0)) {
                z[i] += 1e-8;  // perturb a collision, next sweep separates
                worst = 1.0;
                continue;
            }
            const std::complex<double> step = eval(z[i]) / denom;
            z[i] -= step;
            worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
        }
        if (worst <= 1e-13) break;
    }
    return z;
}

}  // namespace detail

// Exact-arithmetic route for small matrices: max-modulus root of the
// characteristic polynomial. Authoritative up to 8x8, where the coefficient
// recurrence is well inside double range.
inline double companion_spectral_radius(const Matrix& a) {
    if (a.rows() != a.cols()) throw ModelShapeError("spectral radius needs a square matrix");
    if (a.rows() == 0) throw ModelShapeError("spectral radius of an empty matrix");
    if (a.rows() == 1) return std::fabs(a(0, 0));
    const std::vector<double> c = detail::charpoly_coeffs(a);
    bool all_zero = true;
    for (double ck : c) all_zero = all_zero && ck == 0.0;
    if (all_zero) return 0.0;  // nilpotent
    double rho = 0.0;
    for (const auto& z : detail::poly_roots(c)) rho = std::max(rho, std::abs(z));
    return rho;
}

// Power iteration with a fixed seeded start; restarts with fresh seeds on
// stagnation. For n <= 8 the companion route above overrides, so this path
// decides only larger problems, where the matrices this library builds
// (entrywise absolute powers, sign-flipped nonnegative structure) have a
// dominant real eigenvalue.
inline double spectral_radius(const Matrix& a, double tol = 1e-6, int max_iter = 10000) {
    if (a.rows() != a.cols()) throw ModelShapeError("spectral radius needs a square matrix");
    const Eigen::Index n = a.rows();
    if (n == 0) throw ModelShapeError("spectral radius of an empty matrix");
    if (n <= 8) return companion_spectral_radius(a);

    double last = 0.0;
    for (int restart = 0; restart < 3; ++restart) {
        std::mt19937_64 gen(0x5eedULL + static_cast<std::uint64_t>(restart));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = unit(gen);
        v.normalize();
        double est = 0.0;
        int settled = 0;
        bool collapsed = false;
        for (int it = 0; it < max_iter; ++it) {
            Vector w = a * v;
            const double norm = w.norm();
            if (norm == 0.0) {
                collapsed = true;  // v fell into the kernel
                break;
            }
            const double next = norm;  // v is unit length
            if (std::fabs(next - est) <= tol * (1.0 + next)) {
                if (++settled >= 5) return next;
            } else {
                settled = 0;
            }
            est = next;
            v = w / norm;
        }
        if (collapsed) {
            // restarts that keep collapsing indicate a (numerically)
            // nilpotent matrix, whose radius is zero
            if (restart == 2) return 0.0;
            last = 0.0;
            continue;
        }
        last = est;
    }
    throw SpectralEstimateUnconverged(
        "power iteration did not settle within " + std::to_string(max_iter) +
            " iterations after 3 restarts (complex dominant pair?)",
        last);
}

struct ConvergenceReport {
    double rho_R = 0.0;           // rho(I - A), drives the shift sweep
    double rho_absR = 0.0;        // rho(|I - A|), alpha-free comparison point
    double rho_absR_alpha = 0.0;  // rho(|I - A|^alpha), drives scale and skew sweeps
    bool condition1_holds = false;  // rho(|R|^alpha) < 1
    bool condition2_holds = false;  // rho(R) < 1
    bool normalized = false;        // input needed unit-diagonal scaling first
    bool ok() const { return condition1_holds && condition2_holds; }
};

inline ConvergenceReport check_convergence_conditions(const Matrix& a, double alpha,
                                                      double tol = 1e-6) {
    if (a.rows() != a.cols()) throw ModelShapeError("convergence check needs a square matrix");
    validate({alpha, 0.0, 1.0, 0.0});
    ConvergenceReport rep;
    Matrix an = a;
    bool unit = true;
    for (Eigen::Index i = 0; i < a.rows(); ++i) unit = unit && a(i, i) == 1.0;
    if (!unit) {
        an = normalize_unit_diagonal(a).first;
        rep.normalized = true;
    }
    const Matrix r = Matrix::Identity(a.rows(), a.cols()) - an;
    rep.rho_R = spectral_radius(r, tol);
    rep.rho_absR = spectral_radius(r.cwiseAbs(), tol);
    rep.rho_absR_alpha = spectral_radius(entrywise_abs_pow(r, alpha), tol);
    rep.condition1_holds = rep.rho_absR_alpha < 1.0;
    rep.condition2_holds = rep.rho_R < 1.0;
    return rep;
}

}  // namespace stablecf
