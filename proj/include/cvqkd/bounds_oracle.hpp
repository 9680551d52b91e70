#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/parallel.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/stats.hpp"

namespace cvqkd {

/// Result of one Monte Carlo check of a concentration bound.
struct BoundCheckReport {
    std::string lemma;
    std::uint64_t trials = 0;
    double nominal_bound = 0.0;
    double observed_frequency = 0.0;
    double mc_stderr = 0.0;
    bool violated = false;     // observed > bound + 3 stderr
    bool inconclusive = false; // series truncated before convergence
};

namespace detail {

inline BoundCheckReport make_report(std::string lemma, std::uint64_t trials, double bound,
                                    std::uint64_t hits) {
    BoundCheckReport r;
    r.lemma = std::move(lemma);
    r.trials = trials;
    r.nominal_bound = bound;
    r.observed_frequency = static_cast<double>(hits) / static_cast<double>(trials);
    r.mc_stderr = binomial_stderr(r.observed_frequency, trials);
    r.violated = r.observed_frequency > bound + 3.0 * r.mc_stderr;
    return r;
}

// Uniformly random orthonormal pair (q1, q2) in R^dim via Gram-Schmidt on
// two Gaussian vectors.
inline void random_orthonormal_pair(CounterRng& rng, std::vector<double>& q1,
                                    std::vector<double>& q2) {
    const std::size_t dim = q1.size();
    rng.fill_normal(q1);
    rng.fill_normal(q2);
    double n1 = 0.0;
    for (double v : q1) n1 += v * v;
    n1 = std::sqrt(n1);
    for (double& v : q1) v /= n1;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += q1[i] * q2[i];
    double n2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        q2[i] -= dot * q1[i];
        n2 += q2[i] * q2[i];
    }
    n2 = std::sqrt(n2);
    for (double& v : q2) v /= n2;
}

// Generic fixed pair (X, Y) in R^dim expressed in the basis of its span:
// X = alpha e1, Y = beta e1 + gamma e2.
struct SpanPair {
    double alpha, beta, gamma;
    double norm_x_sq, norm_y_sq, inner;
};

inline SpanPair fixed_span_pair(std::uint64_t seed, std::size_t dim) {
    CounterRng rng(seed, /*stream=*/1);
    std::vector<double> x(dim), y(dim);
    rng.fill_normal(x);
    rng.fill_normal(y);
    SpanPair p{};
    double xy = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        p.norm_x_sq += x[i] * x[i];
        p.norm_y_sq += y[i] * y[i];
        xy += x[i] * y[i];
    }
    p.inner = xy;
    p.alpha = std::sqrt(p.norm_x_sq);
    p.beta = xy / p.alpha;
    p.gamma = std::sqrt(p.norm_y_sq - p.beta * p.beta);
    return p;
}

} // namespace detail

/// Laurent-Massart tails of the chi-square distribution with n degrees of
/// freedom: Pr[U - n >= 2 sqrt(nx) + 2x] <= e^-x and
/// Pr[n - U >= 2 sqrt(nx)] <= e^-x.
inline std::vector<BoundCheckReport> check_chi2_tails(int n, double x, std::uint64_t trials,
                                                      std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("check_chi2_tails: n must be >= 1");
    if (!(x > 0.0)) throw std::invalid_argument("check_chi2_tails: x must be > 0");
    const double up = static_cast<double>(n) + 2.0 * std::sqrt(n * x) + 2.0 * x;
    const double down = static_cast<double>(n) - 2.0 * std::sqrt(n * x);
    std::vector<std::uint8_t> hits_down(trials);
    const std::uint64_t upper = parallel_count(trials, [&](std::uint64_t i) {
        CounterRng rng(derive_seed(seed, i));
        const double u = rng.next_chi_square(n);
        hits_down[i] = u <= down ? 1 : 0;
        return u >= up;
    });
    std::uint64_t lower = 0;
    for (std::uint8_t h : hits_down) lower += h;
    const double bound = std::exp(-x);
    return {detail::make_report("chi2_tail_upper", trials, bound, upper),
            detail::make_report("chi2_tail_lower", trials, bound, lower)};
}

/// Projection of a fixed vector of C^2n onto a random n-dimensional complex
/// subspace: both one-sided norm bounds, each with failure probability eps.
inline std::vector<BoundCheckReport> check_random_projection_norm(int n, std::uint64_t trials,
                                                                  double eps,
                                                                  std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("check_random_projection_norm: n must be >= 1");
    if (!(eps >= 2.0 * std::exp(-n / 2.0))) {
        throw std::invalid_argument("check_random_projection_norm: eps below validity floor");
    }
    const double margin = std::sqrt(std::log(2.0 / eps) / n);
    const double up = 1.0 + 1.5 * margin;
    const double down = 1.0 - 2.2 * margin;
    std::vector<std::uint8_t> hits_down(trials);
    const std::uint64_t upper = parallel_count(trials, [&](std::uint64_t i) {
        CounterRng rng(derive_seed(seed, i));
        // First n complex coordinates of a uniform unit vector in C^2n:
        // ratio U/(U+U') of independent chi-squares with 2n dof each.
        const double u = rng.next_chi_square(2 * n);
        const double v = rng.next_chi_square(2 * n);
        const double two_r = 2.0 * u / (u + v);
        hits_down[i] = two_r <= down ? 1 : 0;
        return two_r >= up;
    });
    std::uint64_t lower = 0;
    for (std::uint8_t h : hits_down) lower += h;
    return {detail::make_report("projection_norm_upper", trials, eps, upper),
            detail::make_report("projection_norm_lower", trials, eps, lower)};
}

/// Inner product of the projections of fixed X, Y in R^4n onto a random
/// half-dimensional subspace: two-sided deviation
/// 1.85 sqrt(x/n) (||X||^2 + ||Y||^2), failure probability 8 e^-x.
inline std::vector<BoundCheckReport> check_inner_product_projection(int n,
                                                                    std::uint64_t trials,
                                                                    double x_level,
                                                                    std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("check_inner_product_projection: n must be >= 1");
    if (!(x_level > 0.0 && x_level <= n / 2.0)) {
        throw std::invalid_argument("check_inner_product_projection: need 0 < x <= n/2");
    }
    const std::size_t dim = 4 * static_cast<std::size_t>(n);
    const detail::SpanPair p = detail::fixed_span_pair(seed, dim);
    const double dev = 1.85 * std::sqrt(x_level / n) * (p.norm_x_sq + p.norm_y_sq);
    const std::uint64_t hits = parallel_count(trials, [&](std::uint64_t i) {
        CounterRng rng(derive_seed(seed, i));
        std::vector<double> q1(dim), q2(dim);
        detail::random_orthonormal_pair(rng, q1, q2);
        double u1 = 0.0, w12 = 0.0;
        for (std::size_t k = 0; k < dim / 2; ++k) {
            u1 += q1[k] * q1[k];
            w12 += q1[k] * q2[k];
        }
        const double inner_half = p.alpha * p.beta * u1 + p.alpha * p.gamma * w12;
        return std::abs(2.0 * inner_half - p.inner) > dev;
    });
    return {detail::make_report("inner_product_projection", trials, 8.0 * std::exp(-x_level),
                                hits)};
}

/// Half-versus-half comparison for a rotationally invariant pair in R^4n:
/// inequalities (A), (B) on the norms (failure <= eps each) and (C) on the
/// inner products (failure <= 2 eps).
inline std::vector<BoundCheckReport> check_half_vs_half(int n, std::uint64_t trials, double eps,
                                                        std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("check_half_vs_half: n must be >= 1");
    const double gamma_sq = std::log(2.0 / eps) / (2.0 * n);
    if (!(gamma_sq <= 0.05)) {
        throw std::invalid_argument("check_half_vs_half: outside the lemma regime "
                                    "log(2/eps)/(2n) <= 0.05");
    }
    const double margin = std::sqrt(gamma_sq);
    const std::size_t dim = 4 * static_cast<std::size_t>(n);
    const detail::SpanPair p = detail::fixed_span_pair(seed, dim);
    std::vector<std::uint8_t> hits_b(trials), hits_c(trials);
    const std::uint64_t hits_a = parallel_count(trials, [&](std::uint64_t i) {
        CounterRng rng(derive_seed(seed, i));
        std::vector<double> q1(dim), q2(dim);
        detail::random_orthonormal_pair(rng, q1, q2);
        double u1 = 0.0, w1 = 0.0, c1 = 0.0;
        for (std::size_t k = 0; k < dim / 2; ++k) {
            u1 += q1[k] * q1[k];
            w1 += q2[k] * q2[k];
            c1 += q1[k] * q2[k];
        }
        // Orthonormality fixes the tail-half accumulators.
        const double u2 = 1.0 - u1, w2 = 1.0 - w1, c2 = -c1;
        const double x1 = p.alpha * p.alpha * u1;
        const double x2 = p.alpha * p.alpha * u2;
        const double y1 = p.beta * p.beta * u1 + 2.0 * p.beta * p.gamma * c1 +
                          p.gamma * p.gamma * w1;
        const double y2 = p.beta * p.beta * u2 + 2.0 * p.beta * p.gamma * c2 +
                          p.gamma * p.gamma * w2;
        const double xy1 = p.alpha * p.beta * u1 + p.alpha * p.gamma * c1;
        const double xy2 = p.alpha * p.beta * u2 + p.alpha * p.gamma * c2;
        hits_b[i] = y2 >= (1.0 + 5.0 * margin) * y1 ? 1 : 0;
        hits_c[i] = xy2 <= xy1 - 4.5 * margin * (x1 + y1) ? 1 : 0;
        return x2 >= (1.0 + 5.0 * margin) * x1;
    });
    std::uint64_t b = 0, c = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        b += hits_b[i];
        c += hits_c[i];
    }
    return {detail::make_report("half_vs_half_norm_x", trials, eps, hits_a),
            detail::make_report("half_vs_half_norm_y", trials, eps, b),
            detail::make_report("half_vs_half_inner", trials, 2.0 * eps, c)};
}

/// Synthetic joint law for the expectation-bound lemmas: (g, h) standard
/// bivariate normal with correlation rho, x = g^2, y = h^2, so that
/// E[y | x] = rho^2 x + 1 - rho^2 and the tail functions are computable by
/// quadrature. rho = 0 with y held constant gives the degenerate
/// independent case.
struct ExpectationScenario {
    std::string name;
    double rho = 0.8;
    double a = 4.0;     // x-range split
    double b = 1.4;     // conditional-mean level
    double delta = 1.4; // mean margin
    double series_step = 1.0;
    bool lower_variant = false; // Lemma on C and D_delta instead of A and B_delta
    bool degenerate_y = false;  // y identically 0.5 (independent trivial case)
};

namespace detail {

// P[x <= a, y >= b] for the scenario law, by Simpson quadrature over g.
inline double scenario_upper_tail(const ExpectationScenario& sc, double a, double b) {
    if (sc.degenerate_y) return 0.0; // constant y = 0.5 never reaches b >= 1
    const double s = std::sqrt(1.0 - sc.rho * sc.rho);
    const double hi = std::sqrt(a);
    const int steps = 2000;
    const double h = 2.0 * hi / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double g = -hi + h * i;
        const double tail = (1.0 - normal_cdf((std::sqrt(b) - sc.rho * g) / s)) +
                            (1.0 - normal_cdf((std::sqrt(b) + sc.rho * g) / s));
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * normal_pdf(g, 1.0) * tail;
    }
    return acc * h / 3.0;
}

// P[x >= a, y <= b], by quadrature over |g| >= sqrt(a).
inline double scenario_lower_tail(const ExpectationScenario& sc, double a, double b) {
    const double s = std::sqrt(1.0 - sc.rho * sc.rho);
    const double lo = std::sqrt(a);
    const double hi = lo + 12.0;
    const int steps = 2000;
    const double h = (hi - lo) / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double g = lo + h * i;
        const double inside = normal_cdf((std::sqrt(b) - sc.rho * g) / s) -
                              normal_cdf((-std::sqrt(b) - sc.rho * g) / s);
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * normal_pdf(g, 1.0) * inside;
    }
    return 2.0 * acc * h / 3.0; // both signs of g
}

} // namespace detail

/// Monte Carlo check of the expectation bounds: with A = {x <= a} and
/// B_delta = {E[y|x] >= b + delta},
///   P[A and B_delta] <= (1/delta) sum_k b_{k+1} eps(a, b_k),
/// and with C = {x >= a}, D_delta = {E[y|x] <= b - delta},
///   P[C and D_delta] <= b eps2(a, b) / delta.
inline std::vector<BoundCheckReport> check_expectation_bounds(const ExpectationScenario& sc,
                                                              std::uint64_t trials,
                                                              std::uint64_t seed) {
    const double rho_sq = sc.rho * sc.rho;
    const double mean_floor = 1.0 - rho_sq;

    double bound = 0.0;
    bool inconclusive = false;
    double x_cut; // conditional-mean set boundary in x
    if (sc.lower_variant) {
        x_cut = (sc.b - sc.delta - mean_floor) / rho_sq;
        bound = sc.b * detail::scenario_lower_tail(sc, sc.a, sc.b) / sc.delta;
    } else if (sc.degenerate_y) {
        x_cut = -1.0; // B_delta empty: constant mean 0.5 < b + delta
        bound = 0.0;  // every eps(a, b_k) vanishes
    } else {
        x_cut = (sc.b + sc.delta - mean_floor) / rho_sq;
        // The series terms b_{k+1} eps(a, b_k) must cover all of [b_0, inf).
        double acc = 0.0;
        int k = 0;
        for (; k < 100000; ++k) {
            const double bk = sc.b + k * sc.series_step;
            const double bk1 = sc.b + (k + 1) * sc.series_step;
            const double term = bk1 * detail::scenario_upper_tail(sc, sc.a, bk);
            acc += term;
            if (term < 1e-12) break;
        }
        if (k == 100000) inconclusive = true;
        bound = acc / sc.delta;
    }

    const std::uint64_t hits = parallel_count(trials, [&](std::uint64_t i) {
        CounterRng rng(derive_seed(seed, i));
        const double g = rng.next_normal();
        const double x = g * g;
        if (sc.degenerate_y) return false; // B_delta empty
        if (sc.lower_variant) return x >= sc.a && x <= x_cut;
        return x <= sc.a && x >= x_cut;
    });
    BoundCheckReport r = detail::make_report("expectation_" + sc.name, trials, bound, hits);
    r.inconclusive = inconclusive;
    if (inconclusive) r.violated = false;
    return {r};
}

/// Named suite runner. Known check names: "chi2", "projection_norm",
/// "inner_product", "half_vs_half" (run at each requested eps) and
/// "expectation" (the three fixed scenarios). `bound_scale` rescales every
/// nominal bound; values below 1 force failures for error-path testing.
inline std::vector<BoundCheckReport> run_suite(const std::vector<std::string>& selection,
                                               std::uint64_t trials, std::uint64_t seed,
                                               const std::vector<double>& eps_values,
                                               double bound_scale = 1.0) {
    if (selection.empty()) {
        throw std::invalid_argument("run_suite: empty suite selection");
    }
    if (trials == 0) throw std::invalid_argument("run_suite: need at least one trial");
    std::vector<BoundCheckReport> all;
    std::uint64_t salt = 0;
    const auto add = [&](std::vector<BoundCheckReport> rs) {
        for (auto& r : rs) {
            if (bound_scale != 1.0) {
                r.nominal_bound *= bound_scale;
                r.violated = !r.inconclusive &&
                             r.observed_frequency > r.nominal_bound + 3.0 * r.mc_stderr;
            }
            all.push_back(std::move(r));
        }
    };
    for (const std::string& name : selection) {
        if (name == "chi2") {
            for (double eps : eps_values) {
                add(check_chi2_tails(100, std::log(1.0 / eps), trials,
                                     derive_seed(seed, 1000 + salt++)));
            }
        } else if (name == "projection_norm") {
            for (double eps : eps_values) {
                add(check_random_projection_norm(200, trials, eps,
                                                 derive_seed(seed, 1000 + salt++)));
            }
        } else if (name == "inner_product") {
            for (double eps : eps_values) {
                add(check_inner_product_projection(100, trials, std::log(8.0 / eps),
                                                   derive_seed(seed, 1000 + salt++)));
            }
        } else if (name == "half_vs_half") {
            for (double eps : eps_values) {
                add(check_half_vs_half(500, trials, eps, derive_seed(seed, 1000 + salt++)));
            }
        } else if (name == "expectation") {
            ExpectationScenario upper{"gaussian_upper"};
            ExpectationScenario lower{"gaussian_lower"};
            lower.a = 2.5;
            lower.b = 3.0;
            lower.delta = 0.4;
            lower.lower_variant = true;
            ExpectationScenario degenerate{"independent_degenerate"};
            degenerate.rho = 0.0;
            degenerate.degenerate_y = true;
            degenerate.b = 1.0;
            degenerate.delta = 0.5;
            for (const auto& sc : {upper, lower, degenerate}) {
                add(check_expectation_bounds(sc, trials, derive_seed(seed, 1000 + salt++)));
            }
        } else {
            throw std::invalid_argument("run_suite: unknown check name '" + name + "'");
        }
    }
    return all;
}

/// The full verification suite at the given eps values.
inline std::vector<BoundCheckReport> default_suite(std::uint64_t trials, std::uint64_t seed,
                                                   const std::vector<double>& eps_values,
                                                   double bound_scale = 1.0) {
    return run_suite({"chi2", "projection_norm", "inner_product", "half_vs_half", "expectation"},
                     trials, seed, eps_values, bound_scale);
}

} // namespace cvqkd
