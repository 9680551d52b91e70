#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace cvqkd {

/// Gaussian channel with transmittance T and excess noise xi.
/// All variances are in shot-noise units (vacuum quadrature variance = 1).
struct ChannelModel {
    double transmittance = 1.0;
    double excess_noise = 0.0;

    void validate() const {
        if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
            throw std::invalid_argument("ChannelModel: transmittance must lie in [0, 1]");
        }
        if (!(excess_noise >= 0.0)) {
            throw std::invalid_argument("ChannelModel: excess noise must be >= 0");
        }
    }
};

/// Two-mode squeezed vacuum variance V (> 1 for a nontrivial protocol;
/// V = 1 is vacuum). The equivalent prepare-and-measure modulation
/// variance is V - 1.
struct Modulation {
    double variance = 1.0;

    void validate() const {
        if (!(variance >= 1.0)) {
            throw std::invalid_argument("Modulation: variance must be >= 1");
        }
    }
};

/// Quadrature covariance data of the state shared after the channel:
/// Alice variance, Bob variance, and the q/p correlation magnitude.
struct ExpectedCovariance {
    double alice;
    double bob;
    double correlation;
};

/// Signal-to-noise ratio of the classical channel X -> Y, T(V-1)/(2+T xi).
inline double snr(const ChannelModel& ch, const Modulation& mod) {
    ch.validate();
    mod.validate();
    return ch.transmittance * (mod.variance - 1.0) /
           (2.0 + ch.transmittance * ch.excess_noise);
}

/// Mutual information in bits per channel use (both quadratures):
/// I(A;B) = log2(1 + SNR).
inline double mutual_information_bits(const ChannelModel& ch, const Modulation& mod) {
    return std::log2(1.0 + snr(ch, mod));
}

inline ExpectedCovariance expected_covariance(const ChannelModel& ch, const Modulation& mod) {
    ch.validate();
    mod.validate();
    const double t = ch.transmittance;
    const double v = mod.variance;
    return {v, t * (v - 1.0) + 1.0 + t * ch.excess_noise,
            std::sqrt(t * (v * v - 1.0))};
}

/// Maps entanglement-based heterodyne outcomes to the coherent-state
/// amplitudes Alice has effectively prepared. Entries alternate (q, p);
/// q components scale by +sqrt((V-1)/(V+1)), p components by the negative.
inline std::vector<double> pm_from_eb(std::span<const double> x_eb, const Modulation& mod) {
    mod.validate();
    if (x_eb.size() % 4 != 0) {
        throw std::invalid_argument("pm_from_eb: input length must be divisible by 4");
    }
    const double scale = std::sqrt((mod.variance - 1.0) / (mod.variance + 1.0));
    std::vector<double> out(x_eb.size());
    for (std::size_t k = 0; k < x_eb.size(); ++k) {
        // 1-based odd index = q quadrature.
        out[k] = (k % 2 == 0 ? scale : -scale) * x_eb[k];
    }
    return out;
}

/// Fiber transmittance after `length_km` of propagation.
inline double transmittance_from_km(double length_km, double loss_db_per_km = 0.2) {
    if (!(length_km >= 0.0)) {
        throw std::invalid_argument("transmittance_from_km: length must be >= 0");
    }
    return std::pow(10.0, -loss_db_per_km * length_km / 10.0);
}

} // namespace cvqkd
