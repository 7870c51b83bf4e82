#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ppmc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic random stream. All mappings from raw bits to variates are
/// spelled out here so that results are reproducible independently of the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Stream for replica `index` of a run seeded with `seed`. Streams are
    /// independent for distinct indices and stable across thread counts.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        return Rng(a ^ (b << 1));
    }

    std::uint64_t bits() { return gen_(); }

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform01() {
        return static_cast<double>(bits() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Exponential(1) variate.
    double exponential() { return -std::log(uniform01()); }

    /// One pair of independent standard normals (Box-Muller).
    void normal_pair(double& z1, double& z2) {
        const double r = std::sqrt(2.0 * exponential());
        const double theta = 6.283185307179586476925286766559 * uniform01();
        z1 = r * std::cos(theta);
        z2 = r * std::sin(theta);
    }

    double normal() {
        double z1, z2;
        normal_pair(z1, z2);
        return z1;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for the n used here (n <= 1e6)
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace ppmc
