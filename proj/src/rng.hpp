// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random-number utilities.
//
// Every stochastic quantity in the library is derived from a (seed, tag,
// index) triple through derive_seed(), so reruns with the same master seed
// reproduce results exactly and independent streams never alias.  The
// engine is std::mt19937_64, whose output sequence is pinned by the C++
// standard; the distribution transforms below are hand-rolled because the
// standard leaves std::*_distribution implementation-defined.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace jcam {

// splitmix64 finalizer; bijective on 64-bit values.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a over the tag keeps named streams (layout, shadowing, trials, ...)
// statistically unrelated even for adjacent seeds.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
    return mix64(base ^ mix64(hash_tag(tag) + 0x632BE59BD9B4E019ULL * index));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform on (0, 1]: never zero, so log() below is safe.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; fixed consumption of two engine words per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // CN(0, var): real and imaginary parts iid N(0, var/2).
    std::complex<double> cnormal(double var = 1.0) {
        const double s = std::sqrt(0.5 * var);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

    // Exponential with the given mean (inverse CDF).
    double exponential(double mean) { return -mean * std::log(uniform01()); }

    // Uniform integer in [0, n); n >= 1.  Rejection keeps the draw unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace jcam
