#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace roadnoise {

/// Deterministic pseudo-random generator used everywhere seeds appear
/// (corpus synthesis, weight init, shuffle order). The algorithm is part
/// of the reproducibility contract, so it is spelled out rather than
/// delegated to std::mt19937 (whose distributions are not portable):
///
///   state seeding : splitmix64 over the 64-bit seed
///   core generator: xoshiro256++ (Blackman & Vigna)
///   doubles       : top 53 bits of the output, scaled to [0, 1)
///   normals       : Box-Muller on two uniforms, spare value cached
///   poisson       : Knuth product-of-uniforms (fine for small means)
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        // splitmix64 expansion of the seed into four non-zero words
        std::uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
        spare_valid_ = false;
    }

    /// Derive an independent stream, e.g. one per recording. Mixing the
    /// stream id through splitmix64 keeps nearby ids uncorrelated.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + stream);
        std::uint64_t a = splitmix64(x);
        std::uint64_t b = splitmix64(x);
        return a ^ (b >> 1);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased-enough integer in [0, n): 128-bit multiply rejection-free
    /// variant (Lemire).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double normal() {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        spare_valid_ = true;
        return r * std::cos(theta);
    }

    std::size_t poisson(double mean) {
        const double limit = std::exp(-mean);
        double product = uniform();
        std::size_t count = 0;
        while (product > limit) {
            ++count;
            product *= uniform();
        }
        return count;
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool spare_valid_ = false;
};

} // namespace roadnoise
