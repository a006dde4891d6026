// random.hpp - seeded generator and stable hashing.
//
// std::mt19937_64 is fully specified by the standard, but the std::*_distribution
// adaptors are not, so every draw below is derived from raw engine output. That
// keeps forged datasets byte-identical across standard library implementations.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "mvedit/geometry.hpp"

namespace mvedit {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], unbiased (rejection on the top of the range).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        // 2^64 mod span; values below it would bias the low residues.
        const std::uint64_t threshold = (0u - span) % span;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r < threshold);
        return lo + static_cast<std::int64_t>(r % span);
    }

    // Uniform on the unit sphere (Archimedes: z uniform in [-1,1], azimuth uniform).
    Vec3 unit_vector() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * kPi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(phi), r * std::sin(phi), z};
    }

    Vec3 point_in(const Aabb& box) {
        const double x = uniform(box.lo.x, box.hi.x);
        const double y = uniform(box.lo.y, box.hi.y);
        const double z = uniform(box.lo.z, box.hi.z);
        return {x, y, z};
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a over bytes; stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (const char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace mvedit
