#pragma once

#include <cstdint>

namespace idapbc {

/// Counter-based uniform generator (SplitMix64 over a mixed key).
///
/// Every draw is a pure function of (seed, stream, counter), so training runs
/// are reproducible regardless of evaluation order and restarts.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    /// Uniform draw in the open interval (0, 1).
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t z = mix(seed_ ^ mix(stream ^ 0x9e3779b97f4a7c15ULL) ^ mix(counter));
        // 53 significant bits, shifted off zero so the result stays in (0,1).
        return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform draw in [lo, hi).
    double uniform_range(std::uint64_t stream, std::uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * uniform(stream, counter);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace idapbc
