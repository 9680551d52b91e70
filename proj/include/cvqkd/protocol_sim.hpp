#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cvqkd/bitstring.hpp"
#include "cvqkd/finite_size.hpp"
#include "cvqkd/gaussian_channel.hpp"
#include "cvqkd/parallel.hpp"
#include "cvqkd/parameter_estimation.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/stats.hpp"

namespace cvqkd {

// Sub-streams of the per-trial master seed.
namespace stream {
inline constexpr std::uint64_t kSampling = 0;
inline constexpr std::uint64_t kCorrectnessHash = 1;
inline constexpr std::uint64_t kPrivacyAmplification = 2;
} // namespace stream

/// One protocol execution; the seed fully determines the trial.
struct TrialConfig {
    std::uint64_t seed = 0;
    std::size_t n = 0; // block half-count: vectors have length 4n
    int d = 5;
    ChannelModel channel{};
    Modulation modulation{};
    double beta = 0.95;
    SecurityBudget budget{};
    CovarianceBounds thresholds{0.0, 0.0, 0.0};

    void validate() const {
        if (n < 1) throw std::invalid_argument("TrialConfig: n must be >= 1");
        if (d < 1 || d > 16) throw std::invalid_argument("TrialConfig: d must lie in [1, 16]");
        if (!(beta > 0.0 && beta <= 1.0)) {
            throw std::invalid_argument("TrialConfig: beta must lie in (0, 1]");
        }
        channel.validate();
        modulation.validate();
        budget.validate();
    }
};

/// Quantile discretizer for N(0, variance): 2^d equiprobable intervals,
/// their edges, and the conditional means y_hat_i of each interval.
struct Quantizer {
    double variance = 0.0;
    int d = 0;
    std::vector<double> edges; // 2^d - 1 strictly increasing edges
    std::vector<double> means; // 2^d conditional means, increasing
};

struct TrialOutcome {
    bool passed_pe = false;
    bool passed_ec = false;
    std::uint64_t key_length = 0;
    double empirical_entropy = 0.0;
    SummaryStats stats{};
    BitString key_a;
    BitString key_b;

    bool aborted() const { return !(passed_pe && passed_ec); }
};

/// Heterodyne outcomes of both parties for the nominal Gaussian channel:
/// 4n i.i.d. pairs (x_i, y_i), centered bivariate normal with covariance
/// (1/2) [[V+1, sqrt(T(V^2-1))], [sqrt(T(V^2-1)), T(V-1)+T xi+2]]
/// (the Husimi covariance of the shared state).
inline std::pair<std::vector<double>, std::vector<double>> sample_outcomes(
    const TrialConfig& cfg) {
    cfg.validate();
    const double v = cfg.modulation.variance;
    const double t = cfg.channel.transmittance;
    const double ha = v + 1.0;
    const double hb = t * (v - 1.0) + t * cfg.channel.excess_noise + 2.0;
    const double hc = std::sqrt(t * (v * v - 1.0));
    const double sx = std::sqrt(ha / 2.0);
    const double slope = hc / ha;
    const double se = std::sqrt((hb - hc * hc / ha) / 2.0);

    const std::size_t len = 4 * cfg.n;
    std::vector<double> x(len), y(len);
    CounterRng rng(cfg.seed, stream::kSampling);
    for (std::size_t i = 0; i < len; ++i) {
        const double z1 = rng.next_normal();
        const double z2 = rng.next_normal();
        x[i] = sx * z1;
        y[i] = slope * x[i] + se * z2;
    }
    return {std::move(x), std::move(y)};
}

/// Removes the per-quadrature empirical means: odd-index (q) entries lose
/// the odd-index mean, even-index (p) entries the even-index mean.
inline std::vector<double> center(std::vector<double> values) {
    if (values.size() % 2 != 0) {
        throw std::invalid_argument("center: length must be divisible by 2");
    }
    if (values.empty()) return values;
    double mq = 0.0, mp = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
        mq += values[i];
        mp += values[i + 1];
    }
    mq /= static_cast<double>(values.size() / 2);
    mp /= static_cast<double>(values.size() / 2);
    for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
        values[i] -= mq;
        values[i + 1] -= mp;
    }
    return values;
}

inline Quantizer build_quantizer(double variance, int d) {
    if (!(variance > 0.0)) throw std::domain_error("build_quantizer: variance must be > 0");
    if (d < 1 || d > 16) throw std::domain_error("build_quantizer: d must lie in [1, 16]");
    const std::size_t bins = std::size_t{1} << d;
    Quantizer q;
    q.variance = variance;
    q.d = d;
    q.edges.resize(bins - 1);
    const double sd = std::sqrt(variance);
    for (std::size_t i = 1; i < bins; ++i) {
        q.edges[i - 1] = normal_quantile(static_cast<double>(i) / static_cast<double>(bins)) * sd;
    }
    // y_hat_i = 2^d * Integral_{I_i} x phi_v(x) dx = 2^d v [phi_v(lo) - phi_v(hi)].
    q.means.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double lo = i == 0 ? 0.0 : normal_pdf(q.edges[i - 1], variance);
        const double hi = i == bins - 1 ? 0.0 : normal_pdf(q.edges[i], variance);
        q.means[i] = static_cast<double>(bins) * variance * (lo - hi);
    }
    return q;
}

/// Symbol j (1-based) iff y falls in interval I_j; boundary ties go up.
inline std::vector<std::uint32_t> discretize(std::span<const double> y, const Quantizer& q) {
    std::vector<std::uint32_t> u(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        const auto it = std::upper_bound(q.edges.begin(), q.edges.end(), y[k],
                                         [](double value, double edge) { return value < edge; });
        u[k] = static_cast<std::uint32_t>(it - q.edges.begin()) + 1;
    }
    return u;
}

/// Plug-in (MLE) entropy of the symbol string, in bits per symbol.
inline double empirical_entropy(std::span<const std::uint32_t> symbols, int d) {
    if (symbols.empty()) throw std::invalid_argument("empirical_entropy: empty input");
    std::vector<std::uint64_t> counts(std::size_t{1} << d, 0);
    for (std::uint32_t s : symbols) {
        if (s < 1 || s > counts.size()) {
            throw std::invalid_argument("empirical_entropy: symbol out of range");
        }
        ++counts[s - 1];
    }
    const double total = static_cast<double>(symbols.size());
    double h = 0.0;
    for (std::uint64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

/// Total error-correction leakage for this configuration (syndrome under
/// the beta model plus the correctness hash).
inline double ec_accounting(const TrialConfig& cfg) {
    return ec_leakage_bits(static_cast<double>(cfg.n), cfg.d, cfg.beta,
                           mutual_information_bits(cfg.channel, cfg.modulation),
                           cfg.budget.eps_cor);
}

inline BitString symbols_to_bits(std::span<const std::uint32_t> symbols, int d) {
    BitString bits(0);
    for (std::uint32_t s : symbols) bits.append_symbol(s - 1, d);
    return bits;
}

/// Compares seeded Toeplitz hashes of length ceil(log2(1/eps_cor)) of both
/// symbol strings. Equal strings always pass; distinct strings pass with
/// probability at most 2^-length over the seed.
inline bool correctness_check(std::span<const std::uint32_t> u_a,
                              std::span<const std::uint32_t> u_b, int d, double eps_cor,
                              std::uint64_t seed) {
    if (u_a.size() != u_b.size()) {
        throw std::invalid_argument("correctness_check: length mismatch");
    }
    const std::uint64_t len = correctness_hash_bits(eps_cor);
    const BitString ba = symbols_to_bits(u_a, d);
    const BitString bb = symbols_to_bits(u_b, d);
    const ToeplitzHasher hasher(seed, len, ba.size());
    return hasher.hash(ba) == hasher.hash(bb);
}

/// Seeded Toeplitz privacy amplification to l bits.
inline BitString privacy_amplify(const BitString& u, std::uint64_t l, std::uint64_t seed) {
    if (l > u.size()) {
        throw std::domain_error("privacy_amplify: output longer than input");
    }
    if (l == 0) return BitString(0);
    return ToeplitzHasher(seed, l, u.size()).hash(u);
}

/// Full protocol pipeline: sample, center, quantize, error-correction
/// accounting with correctness hash (reconciliation itself idealized,
/// Alice's estimate equals U), PE test on the exact summary statistics,
/// key length, privacy amplification. Aborts yield key length 0.
inline TrialOutcome run_trial(const TrialConfig& cfg) {
    cfg.validate();
    auto [x, y] = sample_outcomes(cfg);
    x = center(std::move(x));
    y = center(std::move(y));

    TrialOutcome out;
    const std::size_t len = 4 * cfg.n;
    double nx = 0.0, ny = 0.0, nxy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        nx += x[i] * x[i];
        ny += y[i] * y[i];
        nxy += x[i] * y[i];
    }
    out.stats = {nx, ny, nxy, static_cast<double>(cfg.n)};

    const Quantizer quantizer = build_quantizer(ny / static_cast<double>(len), cfg.d);
    const std::vector<std::uint32_t> u = discretize(y, quantizer);
    out.empirical_entropy = empirical_entropy(u, cfg.d);

    const double leak = ec_accounting(cfg);
    const std::vector<std::uint32_t>& u_alice = u; // idealized reconciliation
    out.passed_ec = correctness_check(u_alice, u, cfg.d, cfg.budget.eps_cor,
                                      derive_seed(cfg.seed, stream::kCorrectnessHash));
    out.passed_pe = pe_test(gamma_estimates(out.stats, cfg.budget.eps_pe), cfg.thresholds);
    if (out.aborted()) return out;

    ProtocolParams params;
    params.n = static_cast<double>(cfg.n);
    params.d = cfg.d;
    params.beta = cfg.beta;
    params.leak_ec = leak;
    params.thresholds = cfg.thresholds;
    double l = 0.0;
    try {
        l = key_length(params, cfg.budget, out.empirical_entropy,
                       holevo_f(cfg.thresholds.as_triple()));
    } catch (const std::domain_error&) {
        l = 0.0; // thresholds outside the Holevo domain certify nothing
    }
    out.key_length = static_cast<std::uint64_t>(std::min(l, static_cast<double>(len * cfg.d)));

    const BitString u_bits = symbols_to_bits(u, cfg.d);
    const BitString ua_bits = symbols_to_bits(u_alice, cfg.d);
    const std::uint64_t pa_seed = derive_seed(cfg.seed, stream::kPrivacyAmplification);
    out.key_b = privacy_amplify(u_bits, out.key_length, pa_seed);
    out.key_a = privacy_amplify(ua_bits, out.key_length, pa_seed);
    return out;
}

struct RobustnessEstimate {
    double abort_frequency = 0.0;
    double standard_error = 0.0;
    std::uint64_t trials = 0;
};

/// Abort frequency over independent seeded trials (trial i runs with seed
/// derive_seed(cfg.seed, i)), with its binomial standard error.
inline RobustnessEstimate estimate_robustness(const TrialConfig& cfg, std::uint64_t trials) {
    if (trials < 100) {
        throw std::invalid_argument("estimate_robustness: need at least 100 trials");
    }
    const std::uint64_t aborts = parallel_count(trials, [&](std::uint64_t i) {
        TrialConfig trial = cfg;
        trial.seed = derive_seed(cfg.seed, i);
        return run_trial(trial).aborted();
    });
    RobustnessEstimate est;
    est.trials = trials;
    est.abort_frequency = static_cast<double>(aborts) / static_cast<double>(trials);
    est.standard_error = binomial_stderr(est.abort_frequency, trials);
    return est;
}

} // namespace cvqkd
