#pragma once

#include <cmath>
#include <cstdint>

namespace coalweb {

// 64-bit finalizer with full avalanche (the splitmix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Seed for replica `index` of a run rooted at `root`.  This is the index-th
// output of the splitmix64 stream seeded with `root`, accessed directly so
// that work scheduling can never change which replica sees which stream.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return mix64(root + (index + 1) * kGolden);
}

// Stateless hash of a lattice cell.  Lets ensemble code sample arrows of
// arbitrarily large windows without materializing them: the arrow at (i, j)
// is a pure function of (seed, i, j).
constexpr std::uint64_t cell_hash(std::uint64_t seed, std::int64_t i, std::int64_t j) {
    std::uint64_t z = mix64(seed ^ (static_cast<std::uint64_t>(i) * kGolden));
    return mix64(z ^ (static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4FULL));
}

// +1/-1 coin for a lattice cell.
constexpr int cell_coin(std::uint64_t seed, std::int64_t i, std::int64_t j) {
    return (cell_hash(seed, i, j) >> 63) ? 1 : -1;
}

// Small deterministic generator (splitmix64 state walk).  Not a stdlib
// engine on purpose: the exact stream is part of the reproducibility
// contract, so nothing implementation-defined may sit between the seed and
// the samples.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1], safe as a log argument.
    double next_unit_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the sine sample is cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = next_unit_pos();
        double v = next_unit();
        double r = std::sqrt(-2.0 * std::log(u));
        double ang = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(ang);
        have_spare_ = true;
        return r * std::cos(ang);
    }

    // Exponential with unit rate.
    double next_exponential() {
        return -std::log(next_unit_pos());
    }

    int next_sign() {
        return (next_u64() >> 63) ? 1 : -1;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace coalweb
