#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ofdb {

// splitmix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Order-sensitive hash of a word sequence.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ull;
    for (std::uint64_t w : words) {
        h = mix64(h ^ mix64(w));
    }
    return h;
}

// Identifies one reproducible random stream. Every random draw in the library
// is keyed by one of these, never by thread identity or call order.
struct SeedKey {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    constexpr std::uint64_t engine_seed() const noexcept {
        return hash_words({master_seed, stream_index});
    }

    // Sub-stream for a distinct purpose (chaos game, augmentation, ...).
    constexpr SeedKey child(std::uint64_t tag) const noexcept {
        return SeedKey{engine_seed(), tag};
    }

    friend constexpr bool operator==(const SeedKey&, const SeedKey&) = default;
};

// Purpose tags for SeedKey::child.
namespace seed_tag {
inline constexpr std::uint64_t kChaosGame = 0xC4A05;
inline constexpr std::uint64_t kPatternAug = 0x9A77E2;
inline constexpr std::uint64_t kTextureAug = 0x7E47;
inline constexpr std::uint64_t kEpochShuffle = 0x5E0F;
} // namespace seed_tag

// mt19937_64 with hand-written distribution helpers. The standard
// distributions are implementation-defined, so they would break byte-level
// reproducibility across toolchains.
class Rng {
public:
    explicit Rng(const SeedKey& key) : engine_(key.engine_seed()) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, bound), bound >= 1; unbiased by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
        std::uint64_t x = engine_();
        while (x > limit) {
            x = engine_();
        }
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ofdb
