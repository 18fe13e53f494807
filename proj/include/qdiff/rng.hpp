#pragma once

#include <cstdint>
#include <numbers>

namespace qdiff {

inline constexpr const char* kGeneratorVersion = "ctr-mix64/1";

/// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replica_index = 0;

    /// mix64(master + golden * (replica + 1)). Injective in replica_index for a
    /// fixed master seed since the golden constant is odd.
    constexpr std::uint64_t stream_key() const {
        return mix64(master_seed + kGolden * (replica_index + 1));
    }

    bool operator==(const SeedSpec&) const = default;
};

/// Counter-based stream: draw k is mix64(mix64(k + golden) ^ key). Any draw
/// is addressable without touching the others, so replicas never share state.
class CounterStream {
public:
    constexpr explicit CounterStream(std::uint64_t key, std::uint64_t start = 0)
        : key_(key), counter_(start) {}

    constexpr std::uint64_t at(std::uint64_t k) const { return mix64(mix64(k + kGolden) ^ key_); }

    constexpr std::uint64_t next() { return at(counter_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform angle in [0, 2 pi).
    constexpr double angle() { return 2.0 * std::numbers::pi * uniform(); }

    constexpr std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace qdiff
