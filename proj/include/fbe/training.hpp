#pragma once

// Frequency-domain training sequence: distinctively spaced high-energy pilots
// for integer CFO search plus a low-energy uniform Chu comb for the fractional
// stage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fbe/dsp.hpp"

namespace fbe {

/// Pilot indices, each in [0, N-1].
using IndexSet = std::vector<long long>;

struct SequenceParams {
    std::size_t n = 1024;   // subcarriers
    std::size_t n_d = 8;    // distinctively spaced pilots
    std::size_t n_u = 64;   // uniformly spaced pilots
    double alpha = 0.3;     // share of pilot power on the distinctive pilots
    IndexSet distinct{104, 200, 280, 456, 568, 696, 760, 904};
    std::vector<int> sign_bits = std::vector<int>(8, 0);
    long long chu_root = 1;
    std::size_t beta = 4;   // oversampling used for PAPR evaluation

    std::size_t comb_spacing() const { return n / n_u; }
    std::size_t pilot_count() const { return n_d + n_u; }

    IndexSet uniform() const {
        IndexSet u(n_u);
        for (std::size_t k = 0; k < n_u; ++k) u[k] = static_cast<long long>(k * comb_spacing());
        return u;
    }

    /// Union of distinctive and uniform indices, distinctive first.
    IndexSet pilots() const {
        IndexSet c = distinct;
        const auto u = uniform();
        c.insert(c.end(), u.begin(), u.end());
        return c;
    }
};

/// Pilot-spacing table: row k lists ((d_{k+g+1} - d_k))_N for g = 0..N_D-2.
class LookupTable {
public:
    LookupTable() = default;
    LookupTable(std::size_t rows, std::vector<long long> entries)
        : rows_(rows), entries_(std::move(entries)) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return rows_ == 0 ? 0 : rows_ - 1; }
    long long at(std::size_t k, std::size_t g) const { return entries_.at(k * cols() + g); }

    std::vector<long long> row(std::size_t k) const {
        const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(k * cols());
        return {first, first + static_cast<std::ptrdiff_t>(cols())};
    }

    bool operator==(const LookupTable&) const = default;

private:
    std::size_t rows_ = 0;
    std::vector<long long> entries_;
};

struct TrainingSequence {
    SequenceParams params;
    ComplexVector freq_pilots;  // zero outside the pilot set
    ComplexVector time_symbol;  // unitary inverse transform of freq_pilots
    LookupTable lookup;
};

namespace detail {

inline void require_distinct_in_range(const IndexSet& idx, std::size_t n) {
    std::set<long long> seen;
    for (auto d : idx) {
        if (d < 0 || d >= static_cast<long long>(n)) {
            throw Error(ErrorKind::invalid_input,
                        "pilot index " + std::to_string(d) + " outside [0, " + std::to_string(n - 1) + "]");
        }
        if (!seen.insert(d).second) {
            throw Error(ErrorKind::invalid_input, "duplicate pilot index " + std::to_string(d));
        }
    }
}

inline std::vector<long long> cyclic_spacings(const IndexSet& d, std::size_t n) {
    std::vector<long long> s(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        s[k] = static_cast<long long>(wrap_index(d[(k + 1) % d.size()] - d[k], n));
    }
    return s;
}

}  // namespace detail

/// True iff every cyclic consecutive spacing of the ordered set is unique.
inline bool validate_spacing(const IndexSet& distinct, std::size_t n) {
    detail::require_distinct_in_range(distinct, n);
    auto s = detail::cyclic_spacings(distinct, n);
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
}

/// True iff some pair of uniform pilots has a difference that no pair of
/// distinctive pilots shares. This is the structural half of the uniqueness
/// condition on the ML integer search.
inline bool validate_identifiability(const IndexSet& distinct, const IndexSet& uniform) {
    std::set<long long> diffs;
    for (auto a : distinct) {
        for (auto b : distinct) {
            if (a != b) diffs.insert(a - b);
        }
    }
    for (auto a : uniform) {
        for (auto b : uniform) {
            if (a != b && !diffs.contains(a - b)) return true;
        }
    }
    return false;
}

inline LookupTable build_lookup_table(const IndexSet& distinct, std::size_t n) {
    if (!validate_spacing(distinct, n)) {
        throw Error(ErrorKind::invalid_design, "distinctive pilot spacings are not pairwise distinct");
    }
    const std::size_t nd = distinct.size();
    std::vector<long long> entries;
    entries.reserve(nd * (nd == 0 ? 0 : nd - 1));
    for (std::size_t k = 0; k < nd; ++k) {
        for (std::size_t g = 0; g + 1 < nd; ++g) {
            entries.push_back(static_cast<long long>(wrap_index(distinct[(k + g + 1) % nd] - distinct[k], n)));
        }
    }
    return LookupTable(nd, std::move(entries));
}

/// Throws invalid_parameter naming the first violated rule. Sign bits are
/// only checked when `check_signs` is set, so the sign search can validate a
/// partial parameter set.
inline void validate_params(const SequenceParams& p, bool check_signs = true) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_parameter, msg); };
    if (p.n_u == 0 || p.n_u % 2 != 0) fail("N_U must be even and positive");
    if (p.n % (2 * p.n_u) != 0) fail("N must be a multiple of 2*N_U");
    if (!is_power_of_two(p.n)) {
        throw Error(ErrorKind::unsupported_length, "N = " + std::to_string(p.n) + " is not a power of two");
    }
    if (p.n_d >= p.n_u) fail("N_U must exceed N_D");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (p.distinct.size() != p.n_d) fail("distinctive index set has " + std::to_string(p.distinct.size()) +
                                         " entries, N_D = " + std::to_string(p.n_d));
    if (p.beta < 1) fail("beta must be >= 1");
    if (std::gcd(p.chu_root, static_cast<long long>(p.n_u)) != 1) fail("Chu root must be coprime to N_U");
    try {
        detail::require_distinct_in_range(p.distinct, p.n);
    } catch (const Error& e) {
        fail(e.what());
    }
    const auto x = static_cast<long long>(p.comb_spacing());
    for (auto d : p.distinct) {
        if (d % x != x / 2) {
            fail("distinctive index " + std::to_string(d) + " is not at offset X/2 = " + std::to_string(x / 2) +
                 " from the uniform comb");
        }
    }
    if (!validate_spacing(p.distinct, p.n)) fail("distinctive pilot spacings are not pairwise distinct");
    if (check_signs) {
        if (p.sign_bits.size() != p.n_d) fail("sign_bits must have N_D entries");
        for (int b : p.sign_bits) {
            if (b != 0 && b != 1) fail("sign bits must be 0 or 1");
        }
    }
}

/// Integer code of a sign vector, first bit most significant.
inline std::uint64_t sign_index(const std::vector<int>& bits) {
    std::uint64_t i = 0;
    for (int b : bits) i = (i << 1) | static_cast<std::uint64_t>(b & 1);
    return i;
}

inline std::vector<int> sign_bits_from_index(std::uint64_t i, std::size_t n_d) {
    std::vector<int> bits(n_d);
    for (std::size_t k = 0; k < n_d; ++k) bits[k] = static_cast<int>((i >> (n_d - 1 - k)) & 1U);
    return bits;
}

inline double distinct_amplitude(const SequenceParams& p) {
    return std::sqrt(p.alpha * static_cast<double>(p.n) / static_cast<double>(p.n_d));
}

/// Uniform comb values sqrt((1-alpha)X) * [F^H s]_k, k = 0..N_U-1.
inline ComplexVector uniform_pilot_values(const SequenceParams& p) {
    auto s = forward_dft(chu_sequence(p.n_u, p.chu_root));
    const double scale = std::sqrt((1.0 - p.alpha) * static_cast<double>(p.comb_spacing()));
    for (auto& v : s) v *= scale;
    return s;
}

inline TrainingSequence build_pilots(const SequenceParams& p) {
    validate_params(p);
    TrainingSequence seq;
    seq.params = p;
    seq.freq_pilots.assign(p.n, cplx{});
    const auto uvals = uniform_pilot_values(p);
    const std::size_t x = p.comb_spacing();
    for (std::size_t k = 0; k < p.n_u; ++k) seq.freq_pilots[k * x] = uvals[k];
    const double amp = distinct_amplitude(p);
    for (std::size_t k = 0; k < p.n_d; ++k) {
        seq.freq_pilots[static_cast<std::size_t>(p.distinct[k])] = p.sign_bits[k] ? -amp : amp;
    }
    seq.time_symbol = inverse_dft(seq.freq_pilots);
    seq.lookup = build_lookup_table(p.distinct, p.n);
    return seq;
}

/// sqrt(beta) times the (beta*N)-point unitary synthesis of the pilots, with
/// pilot k placed on column k.
inline ComplexVector time_symbol_oversampled(const TrainingSequence& seq, std::size_t beta) {
    const std::size_t n = seq.freq_pilots.size();
    if (beta < 1 || !is_power_of_two(beta * n)) {
        throw Error(ErrorKind::unsupported_length,
                    "oversampled length " + std::to_string(beta * n) + " is not a power of two");
    }
    ComplexVector padded(beta * n, cplx{});
    std::copy(seq.freq_pilots.begin(), seq.freq_pilots.end(), padded.begin());
    auto out = inverse_dft(padded);
    const double g = std::sqrt(static_cast<double>(beta));
    for (auto& v : out) v *= g;
    return out;
}

/// Peak instantaneous power max_n |p_n|^2 (mean power is unity by construction).
inline double papr(std::span<const cplx> p) {
    double peak = 0.0;
    for (const auto& v : p) peak = std::max(peak, std::norm(v));
    return peak;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct SignSearchResult {
    std::vector<int> best_bits;
    std::uint64_t best_index = 0;
    std::vector<double> papr_by_index;  // entry i holds the PAPR of sign code i

    double min_papr() const { return papr_by_index.at(best_index); }
    double max_papr() const { return *std::max_element(papr_by_index.begin(), papr_by_index.end()); }
};

inline constexpr std::size_t max_exhaustive_signs = 20;

/// Exhaustive PAPR scan over every sign vector. The oversampled symbol is
/// linear in the pilots, so each candidate is the uniform-comb waveform plus a
/// signed sum of per-pilot waveforms. The scan is split across `workers`
/// threads by index; the table does not depend on the split.
inline SignSearchResult optimize_signs(SequenceParams p, std::size_t beta, std::size_t workers = 1) {
    if (p.n_d > max_exhaustive_signs) {
        throw Error(ErrorKind::search_space_too_large,
                    "N_D = " + std::to_string(p.n_d) + " exceeds " + std::to_string(max_exhaustive_signs));
    }
    validate_params(p, false);
    const std::size_t n = p.n;
    const std::size_t len = beta * n;
    if (beta < 1 || !is_power_of_two(len)) {
        throw Error(ErrorKind::unsupported_length, "oversampled length " + std::to_string(len) + " is not a power of two");
    }
    const double g = std::sqrt(static_cast<double>(beta));

    ComplexVector comb(len, cplx{});
    const auto uvals = uniform_pilot_values(p);
    for (std::size_t k = 0; k < p.n_u; ++k) comb[k * p.comb_spacing()] = uvals[k];
    comb = inverse_dft(comb);
    for (auto& v : comb) v *= g;

    // Waveform of a +amplitude pilot on bin d: g*amp*exp(j2pi d n/len)/sqrt(len).
    const double amp = distinct_amplitude(p) * g / std::sqrt(static_cast<double>(len));
    std::vector<ComplexVector> tones(p.n_d, ComplexVector(len));
    for (std::size_t k = 0; k < p.n_d; ++k) {
        const auto d = static_cast<std::uint64_t>(p.distinct[k]);
        for (std::size_t t = 0; t < len; ++t) {
            const double ang = 2.0 * pi * static_cast<double>((d * t) % len) / static_cast<double>(len);
            tones[k][t] = amp * cplx{std::cos(ang), std::sin(ang)};
        }
    }

    const std::size_t count = std::size_t{1} << p.n_d;
    SignSearchResult result;
    result.papr_by_index.assign(count, 0.0);

    auto scan = [&](std::size_t first, std::size_t last) {
        ComplexVector buf(len);
        for (std::size_t i = first; i < last; ++i) {
            const auto bits = sign_bits_from_index(i, p.n_d);
            buf = comb;
            for (std::size_t k = 0; k < p.n_d; ++k) {
                const double s = bits[k] ? -1.0 : 1.0;
                for (std::size_t t = 0; t < len; ++t) buf[t] += s * tones[k][t];
            }
            result.papr_by_index[i] = papr(buf);
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, count);
    if (workers == 1) {
        scan(0, count);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(count, first + chunk);
            if (first < last) pool.emplace_back(scan, first, last);
        }
    }

    const auto best = std::min_element(result.papr_by_index.begin(), result.papr_by_index.end());
    result.best_index = static_cast<std::uint64_t>(best - result.papr_by_index.begin());
    result.best_bits = sign_bits_from_index(result.best_index, p.n_d);
    return result;
}

/// Relative ICI power that a distinctive pilot at offset `offset` from the
/// comb leaks onto the comb, with the offset-independent prefactor dropped.
inline double ici_profile(long long offset, double epsilon, std::size_t comb_spacing, std::size_t n_u) {
    const auto x = static_cast<long long>(comb_spacing);
    if (comb_spacing < 2 || comb_spacing % 2 != 0) {
        throw Error(ErrorKind::invalid_parameter, "comb spacing X must be even");
    }
    if (offset < 1 || offset > x - 1) {
        throw Error(ErrorKind::invalid_parameter,
                    "offset " + std::to_string(offset) + " outside [1, " + std::to_string(x - 1) + "]");
    }
    if (!(epsilon >= -0.5 && epsilon <= 0.5)) {
        throw Error(ErrorKind::invalid_parameter, "fractional offset must lie in [-0.5, 0.5]");
    }
    const double n = static_cast<double>(comb_spacing * n_u);
    const double u = static_cast<double>(offset);
    const double xd = static_cast<double>(comb_spacing);
    double total = 0.0;
    for (std::size_t m = 0; m < n_u / 2; ++m) {
        const double md = static_cast<double>(m);
        const double s0 = std::sin(pi * (u + md * xd + epsilon) / n);
        const double s1 = std::sin(pi * (u - xd - md * xd + epsilon) / n);
        total += 1.0 / (s0 * s0) + 1.0 / (s1 * s1);
    }
    return total;
}

/// Absolute average ICI power, including the channel gain E|h_d|^2 and the
/// pilot power |p_d|^2 that ici_profile omits.
inline double ici_power(long long offset, double epsilon, std::size_t comb_spacing, std::size_t n_u,
                        double channel_gain, double pilot_power) {
    const double n = static_cast<double>(comb_spacing * n_u);
    const double s = std::sin(pi * epsilon);
    return channel_gain * pilot_power * s * s / (n * n) * ici_profile(offset, epsilon, comb_spacing, n_u);
}

/// Integer offset in [1, X-1] minimizing ici_profile. The profile is symmetric
/// about X/2 - epsilon, so at epsilon = +-1/2 two offsets tie exactly; values
/// within `tie_rel` are treated as equal and the one nearest the middle of the
/// range (X/2) is returned.
inline long long optimal_offset(double epsilon, std::size_t comb_spacing, std::size_t n_u, double tie_rel = 1e-12) {
    const auto x = static_cast<long long>(comb_spacing);
    long long best = 1;
    double best_val = ici_profile(1, epsilon, comb_spacing, n_u);
    for (long long v = 2; v <= x - 1; ++v) {
        const double val = ici_profile(v, epsilon, comb_spacing, n_u);
        const bool tie = std::abs(val - best_val) <= tie_rel * std::max(val, best_val);
        if ((!tie && val < best_val) || (tie && std::llabs(2 * v - x) < std::llabs(2 * best - x))) {
            best = v;
            best_val = std::min(val, best_val);
        }
    }
    return best;
}

}  // namespace fbe
