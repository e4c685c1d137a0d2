#pragma once

// Shared numerics: unitary radix-2 transforms, Chu sequences, periodogram.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fbe/error.hpp"

namespace fbe {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

inline constexpr double pi = std::numbers::pi;

/// forward = F^H (analysis, e^{-j2pi nk/N}), inverse = F (synthesis).
/// Both carry the 1/sqrt(N) factor.
enum class TransformDirection { forward, inverse };

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Cyclic index ((k))_n for any signed k.
constexpr std::size_t wrap_index(long long k, std::size_t n) noexcept {
    const auto m = static_cast<long long>(n);
    long long r = k % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

inline double energy(std::span<const cplx> x) {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

namespace detail {

inline void fft_in_place(std::span<cplx> a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles from direct evaluation, no recurrence drift.
        std::vector<cplx> tw(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double ang = sign * 2.0 * pi * static_cast<double>(k) / static_cast<double>(len);
            tw[k] = {std::cos(ang), std::sin(ang)};
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * tw[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : a) v *= scale;
}

}  // namespace detail

/// Unitary DFT of a power-of-two length vector.
inline ComplexVector unitary_dft(std::span<const cplx> x, TransformDirection dir) {
    if (!is_power_of_two(x.size())) {
        throw Error(ErrorKind::unsupported_length,
                    "transform length " + std::to_string(x.size()) + " is not a power of two");
    }
    ComplexVector out(x.begin(), x.end());
    detail::fft_in_place(out, dir == TransformDirection::inverse);
    return out;
}

inline ComplexVector forward_dft(std::span<const cplx> x) { return unitary_dft(x, TransformDirection::forward); }
inline ComplexVector inverse_dft(std::span<const cplx> x) { return unitary_dft(x, TransformDirection::inverse); }

/// Even-length Chu sequence s_n = exp(j*pi*root*n^2/M).
inline ComplexVector chu_sequence(std::size_t length, long long root) {
    if (length == 0 || length % 2 != 0) {
        throw Error(ErrorKind::invalid_parameter, "Chu length must be even and positive, got " + std::to_string(length));
    }
    if (std::gcd(root, static_cast<long long>(length)) != 1) {
        throw Error(ErrorKind::invalid_parameter,
                    "Chu root " + std::to_string(root) + " is not coprime to " + std::to_string(length));
    }
    ComplexVector s(length);
    const auto m = static_cast<long long>(length);
    for (long long n = 0; n < m; ++n) {
        // r*n^2 mod 2M keeps the phase argument small; the sequence is 2M-periodic in r*n^2.
        const long long q = ((root % (2 * m)) * ((n * n) % (2 * m))) % (2 * m);
        const double ang = pi * static_cast<double>(q) / static_cast<double>(m);
        s[static_cast<std::size_t>(n)] = {std::cos(ang), std::sin(ang)};
    }
    return s;
}

/// Cyclic autocorrelation sum_n x_n conj(x_{n-lag}).
inline cplx cyclic_autocorrelation(std::span<const cplx> x, std::size_t lag) {
    cplx acc{};
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * std::conj(x[(i + n - lag % n) % n]);
    return acc;
}

/// (1/N)|sum_n r_n exp(-j 2 pi n f / N)|^2 at an arbitrary (possibly off-grid) frequency.
inline double periodogram_at(std::span<const cplx> r, double freq) {
    const double n_total = static_cast<double>(r.size());
    cplx acc{};
    for (std::size_t n = 0; n < r.size(); ++n) {
        const double ang = -2.0 * pi * static_cast<double>(n) * freq / n_total;
        acc += r[n] * cplx{std::cos(ang), std::sin(ang)};
    }
    return std::norm(acc) / n_total;
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double rx = std::round(x);
    if (rx == x) return 0.0;
    return std::sin(pi * x) / (pi * x);
}

}  // namespace fbe
