#pragma once

#include <cstdint>
#include <random>

namespace tbell {

/// SplitMix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the conversions below are written out
/// explicitly so results do not depend on the standard library's
/// distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for (seed, stream tag, chunk index). Different tags or chunks
    /// give statistically independent sequences.
    static RandomStream derive(std::uint64_t seed, std::uint64_t tag,
                               std::uint64_t index) {
        return RandomStream(mix64(mix64(seed ^ mix64(tag)) + index));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tbell
