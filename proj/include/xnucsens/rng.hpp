#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "core.hpp"

namespace xnucsens {

namespace detail {

// Finalizer of the splitmix64 generator; a full-period bijection on u64.
inline std::uint64_t splitmix64_fin(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: output n is splitmix64_fin(key + n*gamma), so a
// stream is a pure function of (key, counter) built from integer ops only and
// produces identical values on every platform. Substreams re-key through the
// same finalizer, which keeps them statistically disjoint from the parent.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : key_(detail::splitmix64_fin(seed ^ kKeyTweak)) {}

    // Independent stream addressed by (this stream's seed, index).
    SeededRng substream(std::uint64_t index) const {
        SeededRng child(0);
        child.key_ = detail::splitmix64_fin(key_ + kGamma * (index + 1));
        child.counter_ = 0;
        return child;
    }

    // Key identifying this stream; feeding it back through the constructor
    // yields a distinct but equally deterministic stream.
    std::uint64_t stream_key() const { return key_; }

    std::uint64_t next_u64() { return detail::splitmix64_fin(key_ + kGamma * ++counter_); }

    // Uniform in [0, 1), 53 significant bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so consecutive calls consume one uniform pair per two values.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [z0, z1] = gaussian_pair();
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

    // Complex value with independent standard-normal real and imaginary
    // parts. Draws a fresh Box-Muller pair; the scalar cache is untouched.
    cdouble next_complex_gaussian() {
        auto [z0, z1] = gaussian_pair();
        return {z0, z1};
    }

private:
    struct Pair {
        double first, second;
    };

    Pair gaussian_pair() {
        // u1 in (0, 1] so the logarithm is finite.
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kKeyTweak = 0x5851F42D4C957F2Dull;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace xnucsens
