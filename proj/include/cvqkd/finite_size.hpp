#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "cvqkd/gaussian_channel.hpp"
#include "cvqkd/holevo.hpp"
#include "cvqkd/parameter_estimation.hpp"

namespace cvqkd {

/// Failure-probability budget. `eps` is the protocol's security parameter;
/// the composition of the sub-parameters must not exceed it.
struct SecurityBudget {
    double eps_sm = 1e-21;
    double eps_bar = 1e-21;
    double eps_pe = 1e-41;
    double eps_cor = 1e-41;
    double eps_ent = 1e-41;
    double eps = 1e-20;

    void validate() const {
        for (double e : {eps_sm, eps_bar, eps_pe, eps_cor, eps_ent, eps}) {
            if (!(e > 0.0 && e < 1.0)) {
                throw std::invalid_argument("SecurityBudget: every epsilon must lie in (0, 1)");
            }
        }
    }
};

enum class EpsilonComposition {
    ClosedForm, // eps = sqrt(eps_PE + eps_cor + eps_ent) + 2 eps_sm + eps_bar
    Implicit    // eps = 2 eps_sm + eps_bar + (eps_PE + eps_cor + eps_ent)/eps
};

/// Composes the security parameter from the budget. The closed form is the
/// default; the implicit variant solves its fixed-point equation and is
/// always <= the closed form.
inline double compose_epsilon(const SecurityBudget& b,
                              EpsilonComposition mode = EpsilonComposition::ClosedForm) {
    const double s = b.eps_pe + b.eps_cor + b.eps_ent;
    const double base = 2.0 * b.eps_sm + b.eps_bar;
    if (mode == EpsilonComposition::ClosedForm) {
        return std::sqrt(s) + base;
    }
    if (s == 0.0) return base;
    double eps = std::sqrt(s) + base;
    for (int it = 0; it < 100; ++it) {
        const double next = base + s / eps;
        if (std::abs(next - eps) <= 1e-12 * std::max(next, eps)) return next;
        eps = next;
    }
    throw std::runtime_error("compose_epsilon: implicit form did not converge in 100 iterations");
}

/// Smooth min-entropy correction from the AEP for the conditional state:
/// sqrt(2n) [(d+1)^2 + 4(d+1) log2(2/eps_sm^2) + 2 log2(2/(eps^2 eps_sm))]
/// + 4 eps_sm d / eps. All logs base 2.
inline double delta_aep(double n, int d, double eps_sm, double eps) {
    if (!(n >= 1.0)) throw std::domain_error("delta_aep: n must be >= 1");
    const double dp = static_cast<double>(d) + 1.0;
    return std::sqrt(2.0 * n) *
               (dp * dp + 4.0 * dp * std::log2(2.0 / (eps_sm * eps_sm)) +
                2.0 * std::log2(2.0 / (eps * eps * eps_sm))) +
           4.0 * eps_sm * d / eps;
}

/// Empirical-entropy concentration correction:
/// log2(1/eps) + sqrt(8 n log2^2(4n) ln(2/eps_sm)).
/// The log inside the radical is natural (Antos-Kontoyiannis e^-x tail);
/// the others are base 2.
inline double delta_ent(double n, double eps, double eps_sm) {
    if (!(n >= 2.0)) throw std::domain_error("delta_ent: n must be >= 2");
    const double l2 = std::log2(4.0 * n);
    return std::log2(1.0 / eps) + std::sqrt(8.0 * n * l2 * l2 * std::log(2.0 / eps_sm));
}

/// Hash length guaranteeing eps_cor-correctness: ceil(log2(1/eps_cor)).
inline std::uint64_t correctness_hash_bits(double eps_cor) {
    if (!(eps_cor > 0.0 && eps_cor < 1.0)) {
        throw std::domain_error("correctness_hash_bits: eps_cor must lie in (0, 1)");
    }
    return static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / eps_cor)));
}

/// Error-correction leakage under the beta efficiency model,
/// beta = (4dn - leak_EC) / (2n log2(1 + SNR)), plus the verification hash:
/// leak_EC = 4dn - 2n beta log2(1+SNR) + ceil(log2(1/eps_cor)).
inline double ec_leakage_bits(double n, int d, double beta, double mutual_info_bits,
                              double eps_cor) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw std::invalid_argument("ec_leakage_bits: beta must lie in (0, 1]");
    }
    const double syndrome = 4.0 * d * n - beta * 2.0 * n * mutual_info_bits;
    if (syndrome < 0.0) {
        throw std::invalid_argument(
            "ec_leakage_bits: beta too large for this d and SNR (negative syndrome size)");
    }
    return syndrome + static_cast<double>(correctness_hash_bits(eps_cor));
}

struct ProtocolParams {
    double n = 0.0;  // block half-count: 2n signals, 4n symbols
    int d = 5;       // discretization bits per symbol
    double beta = 0.95;
    double leak_ec = 0.0;
    CovarianceBounds thresholds{0.0, 0.0, 0.0};

    void validate() const {
        if (!(n >= 1.0)) throw std::invalid_argument("ProtocolParams: n must be >= 1");
        if (d < 1 || d > 16) throw std::invalid_argument("ProtocolParams: d must lie in [1, 16]");
        if (!(beta > 0.0 && beta <= 1.0)) {
            throw std::invalid_argument("ProtocolParams: beta must lie in (0, 1]");
        }
        if (!(leak_ec >= 0.0)) throw std::invalid_argument("ProtocolParams: leak_ec must be >= 0");
    }
};

struct KeyRateBreakdown {
    double entropy_term = 0.0; // 2n * 2 H per symbol
    double holevo_term = 0.0;  // 2n * f(thresholds)
    double leak_ec = 0.0;
    double delta_aep = 0.0;
    double delta_ent = 0.0;
    double pa_term = 0.0; // 2 log2(1/(2 eps_bar))
};

struct KeyRateReport {
    double key_length = 0.0; // bits, floored at 0
    double rate = 0.0;       // bits per channel use, (1 - eps_rob) l / 2n
    double eps_rob = 0.0;
    KeyRateBreakdown breakdown{};
    std::string abort_reason; // empty when a key is produced
};

/// Key length of Theorem 1:
/// l = max(0, floor(2n [2H - f] - leak_EC - Delta_AEP - Delta_ent
///                  - 2 log2(1/(2 eps_bar)))).
inline double key_length(const ProtocolParams& params, const SecurityBudget& budget,
                         double entropy_per_symbol, double holevo_bits,
                         KeyRateBreakdown* breakdown = nullptr) {
    params.validate();
    budget.validate();
    if (!(entropy_per_symbol >= 0.0 && entropy_per_symbol <= params.d)) {
        throw std::domain_error("key_length: entropy per symbol must lie in [0, d]");
    }
    if (!(holevo_bits >= 0.0)) {
        throw std::domain_error("key_length: holevo term must be >= 0");
    }
    KeyRateBreakdown b;
    b.entropy_term = 2.0 * params.n * 2.0 * entropy_per_symbol;
    b.holevo_term = 2.0 * params.n * holevo_bits;
    b.leak_ec = params.leak_ec;
    b.delta_aep = delta_aep(params.n, params.d, budget.eps_sm, budget.eps);
    b.delta_ent = delta_ent(params.n, budget.eps, budget.eps_sm);
    b.pa_term = 2.0 * std::log2(1.0 / (2.0 * budget.eps_bar));
    if (breakdown) *breakdown = b;
    const double rhs = b.entropy_term - b.holevo_term - b.leak_ec - b.delta_aep -
                       b.delta_ent - b.pa_term;
    return std::max(0.0, std::floor(rhs));
}

/// Expected key rate for the nominal Gaussian channel, modeling error
/// correction through beta (2 H_MLE - leak_EC / 2n = beta I(A;B), with the
/// quantile discretizer giving H = d per symbol) and evaluating the Holevo
/// bound at the `num_sigmas` worst-case threshold triple.
inline KeyRateReport expected_key_rate(const ChannelModel& ch, const Modulation& mod,
                                       double n, int d, double beta,
                                       const SecurityBudget& budget, double eps_rob,
                                       double num_sigmas = 3.0) {
    KeyRateReport report;
    report.eps_rob = eps_rob;
    const double info = mutual_information_bits(ch, mod);
    const CovarianceBounds bounds = pe_thresholds(ch, mod, n, budget.eps_pe, num_sigmas);
    ProtocolParams params;
    params.n = n;
    params.d = d;
    params.beta = beta;
    params.thresholds = bounds;
    params.leak_ec = ec_leakage_bits(n, d, beta, info, budget.eps_cor);

    double holevo;
    try {
        holevo = holevo_f(bounds.as_triple());
    } catch (const std::domain_error& err) {
        report.abort_reason = err.what();
        key_length(params, budget, static_cast<double>(d), 0.0, &report.breakdown);
        report.breakdown.holevo_term = 0.0;
        report.key_length = 0.0;
        report.rate = 0.0;
        return report;
    }
    report.key_length =
        key_length(params, budget, static_cast<double>(d), holevo, &report.breakdown);
    report.rate = (1.0 - eps_rob) * report.key_length / (2.0 * n);
    if (report.key_length == 0.0) report.abort_reason = "negative_key_length";
    return report;
}

struct ModulationGrid {
    double v_minus_one_min = 0.01;
    double v_minus_one_max = 100.0;
    int points = 200;

    void validate() const {
        if (!(v_minus_one_min > 0.0 && v_minus_one_max > v_minus_one_min)) {
            throw std::invalid_argument("ModulationGrid: need 0 < min < max");
        }
        if (!(v_minus_one_max <= 999.0)) {
            throw std::invalid_argument("ModulationGrid: V must stay within (1, 1000]");
        }
        if (points < 2) throw std::invalid_argument("ModulationGrid: need at least 2 points");
    }

    double variance_at(int i) const {
        const double u = std::log(v_minus_one_min) +
                         (std::log(v_minus_one_max) - std::log(v_minus_one_min)) * i /
                             static_cast<double>(points - 1);
        return 1.0 + std::exp(u);
    }
};

/// Maximizes the expected key rate over the modulation variance on a
/// deterministic log-spaced grid, then refines with golden-section search
/// around the best cell. Ties break toward smaller V.
inline std::pair<double, KeyRateReport> optimize_modulation(
    const ChannelModel& ch, double n, int d, double beta, const SecurityBudget& budget,
    double eps_rob, const ModulationGrid& grid = {}, double num_sigmas = 3.0) {
    grid.validate();
    const auto rate_at = [&](double v) {
        return expected_key_rate(ch, Modulation{v}, n, d, beta, budget, eps_rob, num_sigmas);
    };

    int best_idx = 0;
    double best_v = grid.variance_at(0);
    KeyRateReport best = rate_at(best_v);
    for (int i = 1; i < grid.points; ++i) {
        const double v = grid.variance_at(i);
        const KeyRateReport r = rate_at(v);
        if (r.rate > best.rate) {
            best = r;
            best_v = v;
            best_idx = i;
        }
    }
    if (best.rate == 0.0) {
        // Empty feasible region: report rate 0 at the grid minimum.
        return {grid.variance_at(0), rate_at(grid.variance_at(0))};
    }

    // Golden-section refinement in log(V - 1) between the neighbors of the
    // best grid cell.
    const double lo_v = grid.variance_at(std::max(0, best_idx - 1));
    const double hi_v = grid.variance_at(std::min(grid.points - 1, best_idx + 1));
    double lo = std::log(lo_v - 1.0), hi = std::log(hi_v - 1.0);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = rate_at(1.0 + std::exp(x1)).rate;
    double f2 = rate_at(1.0 + std::exp(x2)).rate;
    for (int it = 0; it < 60; ++it) {
        if (f1 >= f2) { // prefer the smaller-V side on ties
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = rate_at(1.0 + std::exp(x1)).rate;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = rate_at(1.0 + std::exp(x2)).rate;
        }
    }
    const double refined_v = 1.0 + std::exp(f1 >= f2 ? x1 : x2);
    const KeyRateReport refined = rate_at(refined_v);
    if (refined.rate > best.rate || (refined.rate == best.rate && refined_v < best_v)) {
        return {refined_v, refined};
    }
    return {best_v, best};
}

/// Leftover-hash secrecy parameter for key length l and smooth min-entropy
/// hmin: eps_sec = (1/2) 2^((l - hmin)/2) + 2 eps'.
inline double secrecy_epsilon(double l, double hmin_eps, double eps_prime) {
    if (!(l >= 0.0)) throw std::domain_error("secrecy_epsilon: l must be >= 0");
    return 0.5 * std::exp2(0.5 * (l - hmin_eps)) + 2.0 * eps_prime;
}

/// Asymptotic expected rate at fixed V: (1 - eps_rob) max(0, beta I - f)
/// with f evaluated at the exact channel triple.
inline double asymptotic_key_rate(const ChannelModel& ch, const Modulation& mod, double beta,
                                  double eps_rob) {
    const ExpectedCovariance cov = expected_covariance(ch, mod);
    const double f = holevo_f({cov.alice, cov.bob, cov.correlation});
    return (1.0 - eps_rob) * std::max(0.0, beta * mutual_information_bits(ch, mod) - f);
}

/// V-optimized asymptotic rate over the same grid-plus-golden-section
/// search used for the finite-size optimizer.
inline std::pair<double, double> optimize_asymptotic_rate(const ChannelModel& ch, double beta,
                                                          double eps_rob,
                                                          const ModulationGrid& grid = {}) {
    grid.validate();
    const auto rate_at = [&](double v) { return asymptotic_key_rate(ch, Modulation{v}, beta, eps_rob); };
    int best_idx = 0;
    double best_v = grid.variance_at(0);
    double best = rate_at(best_v);
    for (int i = 1; i < grid.points; ++i) {
        const double v = grid.variance_at(i);
        const double r = rate_at(v);
        if (r > best) {
            best = r;
            best_v = v;
            best_idx = i;
        }
    }
    double lo = std::log(grid.variance_at(std::max(0, best_idx - 1)) - 1.0);
    double hi = std::log(grid.variance_at(std::min(grid.points - 1, best_idx + 1)) - 1.0);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = rate_at(1.0 + std::exp(x1));
    double f2 = rate_at(1.0 + std::exp(x2));
    for (int it = 0; it < 60; ++it) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = rate_at(1.0 + std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = rate_at(1.0 + std::exp(x2));
        }
    }
    const double refined_v = 1.0 + std::exp(f1 >= f2 ? x1 : x2);
    const double refined = rate_at(refined_v);
    if (refined > best || (refined == best && refined_v < best_v)) return {refined_v, refined};
    return {best_v, best};
}

} // namespace cvqkd
