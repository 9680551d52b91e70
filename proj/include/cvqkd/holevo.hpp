#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace cvqkd {

/// Averaged covariance data (Sigma_a, Sigma_b, Sigma_c) in shot-noise units.
/// Raw estimates may carry a negative sigma_c; Holevo evaluation requires a
/// physical triple (see holevo_f), and violations are reported, not clamped.
struct CovarianceTriple {
    double sigma_a;
    double sigma_b;
    double sigma_c;
};

/// Symplectic eigenvalues of the two-mode state plus the conditional
/// eigenvalue after Bob's heterodyne measurement.
struct SymplecticSpectrum {
    double nu1;
    double nu2;
    double nu3;
};

namespace detail {
// Relative clamp tolerance for radicand/eigenvalue floors; violations beyond
// it are reported as errors, never repaired.
inline constexpr double kClampRel = 1e-12;
} // namespace detail

/// Bosonic entropy function g(x) = (x+1) log2(x+1) - x log2(x), in bits,
/// with the x -> 0 limit defined as 0.
inline double g_entropy(double x) {
    if (x < 0.0) throw std::domain_error("g_entropy: argument must be >= 0");
    if (x == 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

/// Two-mode symplectic eigenvalues (nu1 >= nu2) of the covariance matrix
/// with blocks a*I, b*I and c*sigma_z. They satisfy
///   nu1^2 + nu2^2 = a^2 + b^2 - 2 c^2   and   (nu1 nu2)^2 = (ab - c^2)^2,
/// i.e. nu^2 = (Delta +- sqrt(Delta^2 - 4 D)) / 2. The discriminant is
/// evaluated in the cancellation-free form (a-b)^2 ((a+b)^2 - 4 c^2).
inline std::pair<double, double> symplectic_eigenvalues(const CovarianceTriple& cov) {
    const double a = cov.sigma_a, b = cov.sigma_b, c = cov.sigma_c;
    const double delta = a * a + b * b - 2.0 * c * c;
    double cross = (a + b) * (a + b) - 4.0 * c * c;
    const double scale = std::max({1.0, (a + b) * (a + b), 4.0 * c * c});
    if (cross < 0.0) {
        if (cross < -detail::kClampRel * scale) {
            throw std::domain_error("symplectic_eigenvalues: negative discriminant (numerical degeneracy)");
        }
        cross = 0.0;
    }
    const double root = std::abs(a - b) * std::sqrt(cross);
    double nu1_sq = 0.5 * (delta + root);
    double nu2_sq = 0.5 * (delta - root);
    const double sq_scale = std::max(1.0, std::abs(delta));
    for (double* v : {&nu1_sq, &nu2_sq}) {
        if (*v < 0.0) {
            if (*v < -detail::kClampRel * sq_scale) {
                throw std::domain_error("symplectic_eigenvalues: negative squared eigenvalue");
            }
            *v = 0.0;
        }
    }
    return {std::sqrt(nu1_sq), std::sqrt(nu2_sq)};
}

/// Conditional symplectic eigenvalue of Alice's state after Bob's
/// heterodyne detection: nu3 = a - c^2 / (1 + b).
inline double conditional_nu3(const CovarianceTriple& cov) {
    return cov.sigma_a - cov.sigma_c * cov.sigma_c / (1.0 + cov.sigma_b);
}

namespace detail {

inline void require_physical(const CovarianceTriple& cov) {
    const double a = cov.sigma_a, b = cov.sigma_b, c = cov.sigma_c;
    const double tol = kClampRel * std::max(1.0, std::abs(a * b));
    if (!(a >= 1.0 - kClampRel * std::max(1.0, a))) {
        throw std::domain_error("holevo_f: sigma_a < 1 (unphysical)");
    }
    if (!(b >= 1.0 - kClampRel * std::max(1.0, b))) {
        throw std::domain_error("holevo_f: sigma_b < 1 (unphysical)");
    }
    if (!(c >= -tol)) {
        throw std::domain_error("holevo_f: sigma_c < 0 (outside Holevo evaluation domain)");
    }
    if (!(a * b - c * c >= 1.0 - tol)) {
        throw std::domain_error("holevo_f: sigma_a*sigma_b - sigma_c^2 < 1 (unphysical)");
    }
}

// Floors nu at 1 within the clamp tolerance; errors beyond it.
inline double floor_nu(double nu, double scale, const char* what) {
    if (nu < 1.0) {
        if (nu < 1.0 - kClampRel * std::max(1.0, scale)) {
            throw std::domain_error(std::string(what) + ": symplectic eigenvalue below 1");
        }
        return 1.0;
    }
    return nu;
}

} // namespace detail

inline SymplecticSpectrum symplectic_spectrum(const CovarianceTriple& cov) {
    detail::require_physical(cov);
    auto [nu1, nu2] = symplectic_eigenvalues(cov);
    const double scale = std::max(cov.sigma_a, cov.sigma_b);
    nu1 = detail::floor_nu(nu1, scale, "symplectic_spectrum");
    nu2 = detail::floor_nu(nu2, scale, "symplectic_spectrum");
    const double nu3 = detail::floor_nu(conditional_nu3(cov), scale, "symplectic_spectrum");
    return {nu1, nu2, nu3};
}

/// Holevo information bound between Eve and Bob's measurement result for the
/// Gaussian state parametrized by the triple, in bits per symbol:
///   f = g((nu1-1)/2) + g((nu2-1)/2) - g((nu3-1)/2).
inline double holevo_f(const CovarianceTriple& cov) {
    const SymplecticSpectrum s = symplectic_spectrum(cov);
    return g_entropy((s.nu1 - 1.0) / 2.0) + g_entropy((s.nu2 - 1.0) / 2.0) -
           g_entropy((s.nu3 - 1.0) / 2.0);
}

} // namespace cvqkd
