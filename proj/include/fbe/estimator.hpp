#pragma once

// Two-stage CFO estimator: lookup-table integer search on the distinctive
// pilots, then interference cancellation and a weighted phase-difference
// (BLUE) fractional estimate on the periodic comb.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fbe/channel.hpp"
#include "fbe/dsp.hpp"
#include "fbe/training.hpp"

namespace fbe {

enum class WeightMode {
    paper_verbatim,   // 0.25 X^2 constant as printed; weights do not sum to one
    blue_normalized,  // 1.5 X^2 constant; unbiased
};

inline std::string_view to_string(WeightMode m) {
    return m == WeightMode::paper_verbatim ? "paper_verbatim" : "blue_normalized";
}

inline WeightMode weight_mode_from_string(std::string_view s) {
    if (s == "paper_verbatim") return WeightMode::paper_verbatim;
    if (s == "blue_normalized") return WeightMode::blue_normalized;
    throw Error(ErrorKind::invalid_parameter, "unknown weight mode '" + std::string(s) + "'");
}

struct CfoEstimate {
    long long integer_part = 0;
    double fractional_part = 0.0;
    double total = 0.0;

    // diagnostics
    std::size_t peak_bin = 0;     // zeta
    std::size_t matched_row = 0;  // kappa
    long long raw_shift = 0;      // delta
    std::vector<double> phases;   // phi_1 .. phi_{X/2}
};

/// Maps a raw bin shift into (-N/2, N/2].
constexpr long long wrap_shift(long long delta, std::size_t n) noexcept {
    const auto nn = static_cast<long long>(n);
    if (2 * delta > nn) return delta - nn;
    if (2 * delta <= -nn) return delta + nn;
    return delta;
}

/// Exhaustive integer search over every k' in (-N/2, N/2] on the full pilot
/// set. Kept as the reference for the fast search. Ties go to the smallest
/// |k'|, then to the negative candidate.
inline long long integer_cfo_full_spectrum(std::span<const cplx> spectrum, const IndexSet& pilots) {
    const std::size_t n = spectrum.size();
    const auto half = static_cast<long long>(n / 2);
    auto metric = [&](long long shift) {
        double s = 0.0;
        for (auto c : pilots) s += std::norm(spectrum[wrap_index(shift + c, n)]);
        return s;
    };
    long long best = 0;
    double best_val = metric(0);
    for (long long mag = 1; mag <= half; ++mag) {
        for (long long cand : {-mag, mag}) {
            if (cand <= -half) continue;
            const double v = metric(cand);
            if (v > best_val) {
                best_val = v;
                best = cand;
            }
        }
    }
    return best;
}

inline long long integer_cfo_full(std::span<const cplx> samples, const IndexSet& pilots) {
    return integer_cfo_full_spectrum(forward_dft(samples), pilots);
}

struct IntegerSearch {
    long long estimate = 0;
    std::size_t peak_bin = 0;
    std::size_t matched_row = 0;
    long long raw_shift = 0;
};

/// Fast integer search: locate the strongest bin, identify which distinctive
/// pilot it is by matching the stored spacing rows, and read off the shift.
/// Argmax ties resolve to the lowest index.
inline IntegerSearch integer_cfo_fast_spectrum(std::span<const cplx> spectrum, const LookupTable& table,
                                               const IndexSet& distinct) {
    const std::size_t n = spectrum.size();
    IntegerSearch out;
    double peak = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double m = std::norm(spectrum[k]);
        if (m > peak) {
            peak = m;
            out.peak_bin = k;
        }
    }
    double best = -1.0;
    for (std::size_t row = 0; row < table.rows(); ++row) {
        double s = 0.0;
        for (std::size_t g = 0; g < table.cols(); ++g) {
            s += std::norm(spectrum[wrap_index(table.at(row, g) + static_cast<long long>(out.peak_bin), n)]);
        }
        if (s > best) {
            best = s;
            out.matched_row = row;
        }
    }
    out.raw_shift = static_cast<long long>(out.peak_bin) - distinct.at(out.matched_row);
    out.estimate = wrap_shift(out.raw_shift, n);
    return out;
}

inline IntegerSearch integer_cfo_fast(std::span<const cplx> samples, const LookupTable& table,
                                      const IndexSet& distinct) {
    return integer_cfo_fast_spectrum(forward_dft(samples), table, distinct);
}

/// Whether the strongest received pilot, after removing the true integer
/// shift, is a distinctive one. Averaged over runs this estimates the
/// probability the fast search relies on.
inline bool correct_probability_indicator(std::span<const cplx> spectrum, const IndexSet& pilots,
                                          const IndexSet& distinct, long long integer_shift) {
    const std::size_t n = spectrum.size();
    long long arg = pilots.front();
    double best = -1.0;
    for (auto c : pilots) {
        const double m = std::norm(spectrum[wrap_index(c + integer_shift, n)]);
        if (m > best) {
            best = m;
            arg = c;
        }
    }
    return std::find(distinct.begin(), distinct.end(), arg) != distinct.end();
}

/// Nulls every shifted distinctive pilot and, on whichever side carries more
/// leaked energy summed over all distinctive pilots, its neighbour as well.
/// Equal energy nulls the +1 side.
inline ComplexVector cancel_interference(std::span<const cplx> spectrum, const IndexSet& distinct,
                                         long long integer_estimate) {
    const std::size_t n = spectrum.size();
    ComplexVector out(spectrum.begin(), spectrum.end());
    double upper = 0.0;
    double lower = 0.0;
    for (auto d : distinct) {
        upper += std::norm(spectrum[wrap_index(d + integer_estimate + 1, n)]);
        lower += std::norm(spectrum[wrap_index(d + integer_estimate - 1, n)]);
    }
    const long long side = upper < lower ? -1 : 1;
    for (auto d : distinct) {
        out[wrap_index(d + integer_estimate, n)] = cplx{};
        out[wrap_index(d + integer_estimate + side, n)] = cplx{};
    }
    return out;
}

/// lambda_1 .. lambda_{X/2}.
inline std::vector<double> fractional_weights(WeightMode mode, std::size_t comb_spacing) {
    if (comb_spacing < 2 || comb_spacing % 2 != 0) {
        throw Error(ErrorKind::invalid_parameter, "comb spacing X must be even and >= 2");
    }
    const double x = static_cast<double>(comb_spacing);
    const double offset = mode == WeightMode::paper_verbatim ? 0.25 * x * x : 1.5 * x * x;
    std::vector<double> w(comb_spacing / 2);
    for (std::size_t m = 1; m <= w.size(); ++m) {
        const double md = static_cast<double>(m);
        w[m - 1] = (6.0 * (x - md) * (x - md + 1.0) - offset) / (x * (x * x - 1.0));
    }
    return w;
}

struct FractionalResult {
    double estimate = 0.0;
    std::vector<double> phases;
};

/// Fractional estimate from the interference-cancelled spectrum: back to time
/// domain, undo the integer rotation, correlate at lags m*N_U and combine the
/// successive phase increments with the chosen weights.
inline FractionalResult fractional_cfo(std::span<const cplx> cancelled, long long integer_estimate,
                                       std::size_t cp_length, std::size_t comb_spacing, std::size_t n_u,
                                       WeightMode mode) {
    const std::size_t n = cancelled.size();
    if (comb_spacing * n_u != n) {
        throw Error(ErrorKind::invalid_parameter, "X * N_U must equal the spectrum length");
    }
    if (energy(cancelled) == 0.0) {
        throw Error(ErrorKind::degenerate_input, "interference-cancelled spectrum is identically zero");
    }
    const auto weights = fractional_weights(mode, comb_spacing);
    auto rcc = inverse_dft(cancelled);
    const double nd = static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double cycles = std::fmod(
            static_cast<double>(integer_estimate) * (static_cast<double>(cp_length) + static_cast<double>(t)), nd);
        const double ang = -2.0 * pi * cycles / nd;
        rcc[t] *= cplx{std::cos(ang), std::sin(ang)};
    }

    const std::size_t lags = comb_spacing / 2;
    std::vector<cplx> corr(lags + 1);
    for (std::size_t m = 0; m <= lags; ++m) {
        const std::size_t lag = m * n_u;
        cplx acc{};
        for (std::size_t t = lag; t < n; ++t) acc += rcc[t] * std::conj(rcc[t - lag]);
        corr[m] = acc / static_cast<double>(n - lag);
    }

    FractionalResult out;
    out.phases.resize(lags);
    double weighted = 0.0;
    for (std::size_t m = 1; m <= lags; ++m) {
        out.phases[m - 1] = std::arg(corr[m] * std::conj(corr[m - 1]));
        weighted += weights[m - 1] * out.phases[m - 1];
    }
    out.estimate = nd / (2.0 * pi * static_cast<double>(n_u)) * weighted;
    return out;
}

inline CfoEstimate estimate_spectrum(std::span<const cplx> spectrum, const TrainingSequence& seq,
                                     std::size_t cp_length, WeightMode mode = WeightMode::blue_normalized) {
    const auto& p = seq.params;
    if (spectrum.size() != p.n) {
        throw Error(ErrorKind::invalid_input, "received symbol length does not match N");
    }
    const auto integer = integer_cfo_fast_spectrum(spectrum, seq.lookup, p.distinct);
    const auto cancelled = cancel_interference(spectrum, p.distinct, integer.estimate);
    auto frac = fractional_cfo(cancelled, integer.estimate, cp_length, p.comb_spacing(), p.n_u, mode);

    CfoEstimate est;
    est.integer_part = integer.estimate;
    est.fractional_part = frac.estimate;
    est.total = static_cast<double>(integer.estimate) + frac.estimate;
    est.peak_bin = integer.peak_bin;
    est.matched_row = integer.matched_row;
    est.raw_shift = integer.raw_shift;
    est.phases = std::move(frac.phases);
    return est;
}

inline CfoEstimate estimate(const ReceivedSymbol& r, const TrainingSequence& seq,
                            WeightMode mode = WeightMode::blue_normalized) {
    return estimate_spectrum(forward_dft(r.samples), seq, r.config.cp_length, mode);
}

/// Cramer-Rao bound on the normalized CFO variance.
inline double crb(std::size_t n, double alpha, double snr_db) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::invalid_parameter, "alpha must lie in (0, 1)");
    }
    const double nd = static_cast<double>(n);
    return 1.5 / (pi * pi * nd * (1.0 - 1.0 / (nd * nd)) * (1.0 - alpha) * std::pow(10.0, snr_db / 10.0));
}

}  // namespace fbe
