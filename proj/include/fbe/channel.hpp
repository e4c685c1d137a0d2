#pragma once

// Quasi-static multipath Rayleigh channel with CFO and AWGN. The cyclic prefix
// is not materialized: under ideal timing, CP insertion and removal reduce to
// a cyclic convolution plus the exp(j2pi eps N_g/N) phase term.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fbe/dsp.hpp"

namespace fbe {

using Rng = std::mt19937_64;

/// Stream for run `run` of grid point `point`: seed_seq over the 32-bit halves
/// of the master seed followed by the point and run indices. Any single run
/// can be replayed from (master, point, run) alone.
inline Rng derive_stream(std::uint64_t master, std::uint64_t point, std::uint64_t run) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(run),
                      static_cast<std::uint32_t>(run >> 32)};
    return Rng(seq);
}

struct ChannelProfile {
    std::string name;
    std::vector<std::size_t> tap_delays;  // samples
    std::vector<double> tap_powers_db;
    double doppler_hz = 0.0;  // recorded, not simulated

    std::size_t length() const { return tap_delays.empty() ? 0 : tap_delays.back() + 1; }
};

/// Sampling interval used to convert the reference delay tables to samples.
inline constexpr double sample_interval_us = 0.1;

inline ChannelProfile channel1() {
    // {0, 0.2, 0.4, 0.8} us
    return {"channel1", {0, 2, 4, 8}, {0.0, -9.7, -19.2, -22.8}, 50.0};
}

inline ChannelProfile channel2() {
    // {0, 0.3, 0.7, 1.1, 1.3, 2.4} us, equal powers
    return {"channel2", {0, 3, 7, 11, 13, 24}, std::vector<double>(6, 0.0), 200.0};
}

inline ChannelProfile flat_channel() { return {"flat", {0}, {0.0}, 0.0}; }

inline ChannelProfile builtin_profile(const std::string& name) {
    if (name == "channel1") return channel1();
    if (name == "channel2") return channel2();
    if (name == "flat") return flat_channel();
    throw Error(ErrorKind::invalid_parameter, "unknown channel profile '" + name + "'");
}

/// `cp_length` of zero skips the cyclic-prefix coverage check.
inline void validate_profile(const ChannelProfile& p, std::size_t cp_length = 0) {
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::invalid_parameter, "channel profile '" + p.name + "': " + msg);
    };
    if (p.tap_delays.empty()) fail("no taps");
    if (p.tap_delays.size() != p.tap_powers_db.size()) fail("delay and power lists differ in length");
    if (p.tap_delays.front() != 0) fail("first delay must be 0");
    for (std::size_t i = 1; i < p.tap_delays.size(); ++i) {
        if (p.tap_delays[i] <= p.tap_delays[i - 1]) fail("delays must be strictly increasing");
    }
    for (double db : p.tap_powers_db) {
        if (!std::isfinite(db)) fail("tap power must be finite");
    }
    if (cp_length != 0 && p.tap_delays.back() >= cp_length) {
        fail("delay spread " + std::to_string(p.tap_delays.back()) + " not covered by CP length " +
             std::to_string(cp_length));
    }
}

/// Linear tap powers scaled to unit sum.
inline std::vector<double> normalized_powers(const ChannelProfile& p) {
    std::vector<double> lin(p.tap_powers_db.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < lin.size(); ++i) {
        lin[i] = std::pow(10.0, p.tap_powers_db[i] / 10.0);
        sum += lin[i];
    }
    for (auto& v : lin) v /= sum;
    return lin;
}

struct ChannelRealization {
    ComplexVector taps;  // dense, zero between active delays
};

/// Zero-mean circular complex Gaussian with variance `var`.
inline cplx complex_gaussian(Rng& rng, double var) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    const double re = gauss(rng);
    const double im = gauss(rng);
    return {re, im};
}

inline ChannelRealization draw_channel(const ChannelProfile& profile, Rng& rng) {
    validate_profile(profile);
    const auto powers = normalized_powers(profile);
    ChannelRealization h;
    h.taps.assign(profile.length(), cplx{});
    for (std::size_t i = 0; i < powers.size(); ++i) h.taps[profile.tap_delays[i]] = complex_gaussian(rng, powers[i]);
    return h;
}

/// Per-sample noise variance for a given Es/N0. Training symbols carry unit
/// mean power and channels unit mean energy, so sigma^2 = 10^(-SNR/10).
/// An infinite SNR gives a noiseless link.
inline double snr_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

inline constexpr double noiseless = std::numeric_limits<double>::infinity();

struct TransmissionConfig {
    double epsilon = 0.0;        // CFO in subcarrier spacings, in (-N/2, N/2]
    std::size_t cp_length = 64;
    double snr_db = noiseless;
    std::uint64_t seed = 0;      // informational; the caller owns the Rng
};

struct ReceivedSymbol {
    ComplexVector samples;
    TransmissionConfig config;
    ChannelRealization channel;
};

/// r_n = exp(j2pi eps (N_g + n)/N) (h (*) p)_n + w_n with cyclic convolution.
inline ReceivedSymbol transmit(std::span<const cplx> symbol, const ChannelRealization& h,
                               const TransmissionConfig& cfg, Rng& rng) {
    const std::size_t n = symbol.size();
    const double nd = static_cast<double>(n);
    if (h.taps.empty() || h.taps.size() > n) {
        throw Error(ErrorKind::invalid_parameter, "channel length must lie in [1, N]");
    }
    if (!(cfg.epsilon > -nd / 2.0 && cfg.epsilon <= nd / 2.0)) {
        throw Error(ErrorKind::invalid_parameter, "CFO outside (-N/2, N/2]");
    }
    ReceivedSymbol out;
    out.config = cfg;
    out.channel = h;
    out.samples.assign(n, cplx{});
    for (std::size_t l = 0; l < h.taps.size(); ++l) {
        const cplx g = h.taps[l];
        if (g == cplx{}) continue;
        for (std::size_t t = 0; t < n; ++t) out.samples[t] += g * symbol[(t + n - l) % n];
    }
    // Phase as eps*(N_g + n) reduced mod N before scaling keeps large-eps rotations accurate.
    for (std::size_t t = 0; t < n; ++t) {
        const double cycles = std::fmod(cfg.epsilon * (static_cast<double>(cfg.cp_length) + static_cast<double>(t)), nd);
        const double ang = 2.0 * pi * cycles / nd;
        out.samples[t] *= cplx{std::cos(ang), std::sin(ang)};
    }
    const double var = snr_to_noise_var(cfg.snr_db);
    if (var > 0.0) {
        for (auto& v : out.samples) v += complex_gaussian(rng, var);
    }
    return out;
}

}  // namespace fbe
