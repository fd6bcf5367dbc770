#pragma once

// Integer counter-based random generator (splitmix64) with a fixed mapping
// to doubles. Identical seeds yield bit-identical streams on every
// platform, which the vortex experiment relies on for reproducibility.

#include <cstdint>

namespace conservo {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; never zero, safe under log.
    double uniform01_open_low() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [-1, 1].
    double uniform_pm1() noexcept { return 2.0 * uniform01() - 1.0; }

private:
    std::uint64_t state_;
};

}  // namespace conservo
