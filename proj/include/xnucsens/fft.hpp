#pragma once

#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "core.hpp"

namespace xnucsens {

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
    int m = 1;
    while (m < n) m <<= 1;
    return m;
}

// Precomputed bit-reversal permutation and forward twiddles for one size.
struct FftPlan {
    std::vector<int> rev;
    std::vector<cdouble> tw;  // tw[j] = exp(-2*pi*i*j/n), j < n/2

    explicit FftPlan(int n) : rev(n), tw(n / 2) {
        int log2n = 0;
        while ((1 << log2n) < n) ++log2n;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < log2n; ++b)
                if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
            rev[i] = r;
        }
        for (int j = 0; j < n / 2; ++j) {
            double ang = -2.0 * std::numbers::pi * j / n;
            tw[j] = {std::cos(ang), std::sin(ang)};
        }
    }
};

inline const FftPlan& fft_plan(int n) {
    static std::map<int, FftPlan> plans;
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, FftPlan(n)).first;
    return it->second;
}

// Unscaled in-place forward FFT, n a power of two.
inline void fft_pow2(cdouble* a, int n) {
    if (n == 1) return;
    const FftPlan& plan = fft_plan(n);
    for (int i = 0; i < n; ++i)
        if (plan.rev[i] > i) std::swap(a[i], a[plan.rev[i]]);
    for (int len = 2; len <= n; len <<= 1) {
        int step = n / len;
        for (int base = 0; base < n; base += len) {
            for (int j = 0; j < len / 2; ++j) {
                cdouble u = a[base + j];
                cdouble v = a[base + j + len / 2] * plan.tw[static_cast<std::size_t>(j) * step];
                a[base + j] = u + v;
                a[base + j + len / 2] = u - v;
            }
        }
    }
}

// Chirp table and pre-transformed convolution kernel for Bluestein at size
// n. The chirp is exp(-i*pi*k^2/n) with the square reduced mod 2n so the
// argument stays small and accurate for any k.
struct BluesteinPlan {
    int m;
    std::vector<cdouble> w;   // chirp, length n
    std::vector<cdouble> gf;  // FFT of the mirrored conjugate chirp, length m

    explicit BluesteinPlan(int n) : m(next_pow2(2 * n - 1)), w(n), gf(m, cdouble(0, 0)) {
        for (int k = 0; k < n; ++k) {
            std::uint64_t q = (static_cast<std::uint64_t>(k) * k) % (2ull * n);
            double ang = -std::numbers::pi * static_cast<double>(q) / n;
            w[k] = {std::cos(ang), std::sin(ang)};
        }
        gf[0] = std::conj(w[0]);
        for (int k = 1; k < n; ++k) gf[k] = gf[m - k] = std::conj(w[k]);
        fft_pow2(gf.data(), m);
    }
};

inline const BluesteinPlan& bluestein_plan(int n) {
    static std::map<int, BluesteinPlan> plans;
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, BluesteinPlan(n)).first;
    return it->second;
}

// Unscaled forward DFT of arbitrary size via the Bluestein chirp transform.
inline void fft_bluestein(cdouble* a, int n) {
    const BluesteinPlan& plan = bluestein_plan(n);
    int m = plan.m;
    std::vector<cdouble> f(m, cdouble(0, 0));
    for (int k = 0; k < n; ++k) f[k] = a[k] * plan.w[k];
    fft_pow2(f.data(), m);
    for (int k = 0; k < m; ++k) f[k] *= plan.gf[k];
    // Unscaled inverse FFT through conjugation.
    for (auto& z : f) z = std::conj(z);
    fft_pow2(f.data(), m);
    for (int k = 0; k < n; ++k) a[k] = std::conj(f[k]) * plan.w[k] / static_cast<double>(m);
}

// Unscaled in-place DFT of any length; `inverse` flips the exponent sign.
inline void dft_1d(cdouble* a, int n, bool inverse) {
    if (inverse)
        for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]);
    if (is_pow2(n))
        fft_pow2(a, n);
    else
        fft_bluestein(a, n);
    if (inverse)
        for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]);
}

}  // namespace detail

// In-place unitary 2-D DFT of a row-major width x height block. The DC
// coefficient sits at index (0, 0) and each direction carries the symmetric
// 1/sqrt(width*height) scale, so forward followed by inverse is the identity
// and both directions preserve the l2 norm.
inline void dft_2d_unitary(cdouble* data, int width, int height, bool inverse) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("fft: transform dimensions must be at least 1x1");
    for (int y = 0; y < height; ++y)
        detail::dft_1d(data + static_cast<std::size_t>(y) * width, width, inverse);
    std::vector<cdouble> col(height);
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) col[y] = data[static_cast<std::size_t>(y) * width + x];
        detail::dft_1d(col.data(), height, inverse);
        for (int y = 0; y < height; ++y) data[static_cast<std::size_t>(y) * width + x] = col[y];
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(width) * height);
    std::size_t total = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

inline ComplexImage dft_2d_unitary(const ComplexImage& img, bool inverse) {
    ComplexImage out = img;
    dft_2d_unitary(out.samples.data(), out.grid.width, out.grid.height, inverse);
    return out;
}

}  // namespace xnucsens
