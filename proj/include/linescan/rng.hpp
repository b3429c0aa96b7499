#pragma once

#include "linescan/geometry.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace linescan {

/// Deterministic random source. All randomness in the library flows through
/// this class so identical seeds reproduce identical artifacts byte for byte.
/// Distributions are hand-rolled on top of mt19937_64 because the standard
/// distribution objects are not pinned across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t nextU64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniformInt(int n) {
        return static_cast<int>(nextU64() % static_cast<std::uint64_t>(n));
    }

    /// Standard normal via Box-Muller. Two draws per call, no cached spare.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniformly distributed unit vector.
    Vec3 unitVec3() {
        double z = 1.0 - 2.0 * uniform();
        double phi = 2.0 * kPi * uniform();
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }

    /// Decorrelated child seed for a named pipeline stage.
    static std::uint64_t deriveSeed(std::uint64_t root, std::string_view tag) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t z = root ^ h;
        z += 0x9e3779b97f4a7c15ull;  // splitmix64 finalizer
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace linescan
