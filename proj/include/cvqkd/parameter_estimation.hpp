#pragma once

#include <cmath>
#include <stdexcept>

#include "cvqkd/gaussian_channel.hpp"
#include "cvqkd/holevo.hpp"

namespace cvqkd {

/// Sufficient statistics of the raw heterodyne data. The vectors X, Y have
/// length 4n (2n signals, two quadratures each).
struct SummaryStats {
    double norm_x_sq = 0.0;
    double norm_y_sq = 0.0;
    double inner_xy = 0.0;
    double n = 0.0;

    void validate() const {
        if (!(n >= 1.0)) throw std::domain_error("SummaryStats: n must be >= 1");
        if (!(norm_x_sq >= 0.0 && norm_y_sq >= 0.0)) {
            throw std::domain_error("SummaryStats: norms must be >= 0");
        }
        // Cauchy-Schwarz, with slack for accumulated rounding.
        const double bound = std::sqrt(norm_x_sq * norm_y_sq);
        if (std::abs(inner_xy) > bound * (1.0 + 1e-9) + 1e-12) {
            throw std::domain_error("SummaryStats: |<X,Y>| exceeds ||X|| ||Y||");
        }
    }
};

struct GammaEstimates {
    double gamma_a;
    double gamma_b;
    double gamma_c;
};

/// Thresholds of the parameter estimation test.
struct CovarianceBounds {
    double sigma_a_max;
    double sigma_b_max;
    double sigma_c_min;

    CovarianceTriple as_triple() const { return {sigma_a_max, sigma_b_max, sigma_c_min}; }
};

/// Confidence-bound constants (a, b, c, d) of the two-half estimation
/// argument. All concentration logs are natural (they descend from e^-x
/// tail bounds).
struct BadEventConstants {
    double a;
    double b;
    double c;
    double d;
    /// False when the n-regime condition
    /// [1+1.5 sqrt(ln(36/eps)/n)][1+(360/eps)e^(-n/25)] <= 1+2 sqrt(ln(36/eps)/n)
    /// fails, i.e. the printed gamma coefficients do not dominate the
    /// two-half bounds at this block size.
    bool regime_ok;
};

/// Covariance estimators gamma_a, gamma_b, gamma_c from the summary
/// statistics, inflated so that they upper/lower-bound the averaged
/// covariance of the unmeasured half except with probability eps_pe.
inline GammaEstimates gamma_estimates(const SummaryStats& stats, double eps_pe) {
    stats.validate();
    if (!(eps_pe > 0.0 && eps_pe < 1.0)) {
        throw std::domain_error("gamma_estimates: eps_pe must lie in (0, 1)");
    }
    const double n = stats.n;
    const double inflate = 1.0 + 2.0 * std::sqrt(std::log(36.0 / eps_pe) / n);
    const double gamma_a = inflate * stats.norm_x_sq / (2.0 * n) - 1.0;
    const double gamma_b = inflate * stats.norm_y_sq / (2.0 * n) - 1.0;
    const double gamma_c =
        stats.inner_xy / (2.0 * n) -
        5.0 * std::sqrt(std::log(8.0 / eps_pe) / (n * n * n)) *
            (stats.norm_x_sq + stats.norm_y_sq);
    return {gamma_a, gamma_b, gamma_c};
}

/// PE test: pass iff gamma_a <= Sigma_a_max and gamma_b <= Sigma_b_max and
/// gamma_c >= Sigma_c_min (boundaries inclusive).
inline bool pe_test(const GammaEstimates& g, const CovarianceBounds& bounds) {
    return g.gamma_a <= bounds.sigma_a_max && g.gamma_b <= bounds.sigma_b_max &&
           g.gamma_c >= bounds.sigma_c_min;
}

/// Threshold selection for the nominal Gaussian channel.
///
/// Each heterodyne pair (x_i, y_i), i = 1..4n, is modeled as centered
/// bivariate normal with covariance (1/2) [[V+1, sqrt(T(V^2-1))],
/// [sqrt(T(V^2-1)), T(V-1)+T xi+2]], so E||X||^2 = 2n(V+1),
/// E||Y||^2 = 2n(T(V-1)+T xi+2) and E<X,Y> = 2n sqrt(T(V^2-1)).
/// The bounds shift each statistic by `num_sigmas` exact standard
/// deviations of that model and pass the results through the gamma
/// estimator formulas.
inline CovarianceBounds pe_thresholds(const ChannelModel& ch, const Modulation& mod,
                                      double n, double eps_pe, double num_sigmas = 3.0) {
    ch.validate();
    mod.validate();
    if (!(n >= 1.0)) throw std::domain_error("pe_thresholds: n must be >= 1");
    const double v = mod.variance;
    const double ha = v + 1.0;
    const double hb = ch.transmittance * (v - 1.0) + ch.transmittance * ch.excess_noise + 2.0;
    const double hc = std::sqrt(ch.transmittance * (v * v - 1.0));

    const double norm_x = 2.0 * n * ha + num_sigmas * ha * std::sqrt(2.0 * n);
    const double norm_y = 2.0 * n * hb + num_sigmas * hb * std::sqrt(2.0 * n);
    const double inner = 2.0 * n * hc - num_sigmas * std::sqrt(n * (ha * hb + hc * hc));

    const double inflate = 1.0 + 2.0 * std::sqrt(std::log(36.0 / eps_pe) / n);
    return {inflate * norm_x / (2.0 * n) - 1.0,
            inflate * norm_y / (2.0 * n) - 1.0,
            inner / (2.0 * n) -
                5.0 * std::sqrt(std::log(8.0 / eps_pe) / (n * n * n)) * (norm_x + norm_y)};
}

inline BadEventConstants bad_event_constants(const SummaryStats& stats, double eps) {
    stats.validate();
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::domain_error("bad_event_constants: eps must lie in (0, 1)");
    }
    const double n = stats.n;
    const double sums = stats.norm_x_sq + stats.norm_y_sq;
    const double half_margin = 1.5 * std::sqrt(std::log(36.0 / eps) / n);
    const double tail = (360.0 / eps) * std::exp(-n / 25.0);
    BadEventConstants out{};
    out.a = 0.5 * (1.0 + half_margin) * stats.norm_x_sq;
    out.b = out.a * (1.0 + tail);
    out.c = 0.5 * stats.inner_xy - std::sqrt(std::log(72.0 / eps) / n) * sums;
    out.d = out.c - 2.0 * sums * std::sqrt(8.0 * std::log(18.0 / eps) / n);
    out.regime_ok =
        (1.0 + half_margin) * (1.0 + tail) <= 1.0 + 2.0 * std::sqrt(std::log(36.0 / eps) / n);
    return out;
}

} // namespace cvqkd
