#pragma once

#include <cstdint>
#include <random>

namespace mesotree {

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of replicate `r` derived from the plan's base seed:
///   splitmix64(base + (r + 1) * 0x9E3779B97F4A7C15)
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t r) noexcept {
    return splitmix64(base + (r + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Replicate-private random stream. mt19937_64 output is fixed by the
/// standard; the double conversion is done here so results do not depend on
/// the standard library's distribution implementations.
class Rng {
    __extension__ using u128 = unsigned __int128;

public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        // Lemire's nearly-divisionless method.
        auto x = engine_();
        auto m = static_cast<u128>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (low < threshold) {
                x = engine_();
                m = static_cast<u128>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mesotree
