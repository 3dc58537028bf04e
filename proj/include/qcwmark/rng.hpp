#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "qcwmark/chacha.hpp"

namespace qcw {

/// splitmix64 step; the standard mixer for deriving independent seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic per-index seed derivation: seed_i = hash(master, i).
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index * 0x9e3779b97f4a7c15ull + 1));
}

/// Deterministic random source backed by a ChaCha20 keystream. Uniform and
/// Gaussian draws are reproducible for a given seed within this
/// implementation; cross-language bit-exactness is not a goal.
class ChaChaRng {
public:
    explicit ChaChaRng(uint64_t seed) : stream_(make_key(seed), kNonce, 0) {}

    uint64_t next_u64() { return stream_.next_u64(); }

    /// Uniform integer in [0, bound) via rejection sampling; bound >= 1.
    uint64_t uniform_below(uint64_t bound) {
        if (bound <= 1) return 0;
        uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % bound;
        uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % bound;
    }

    /// Uniform double in (0, 1].
    double uniform_pos() {
        return double((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal draw, Box-Muller over keystream uniforms.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform_pos();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::array<uint8_t, 32> make_key(uint64_t seed) {
        std::array<uint8_t, 32> key{};
        uint64_t a = splitmix64(seed);
        uint64_t b = splitmix64(a);
        uint64_t c = splitmix64(b);
        uint64_t d = splitmix64(c);
        const uint64_t words[4] = {a, b, c, d};
        for (int w = 0; w < 4; ++w)
            for (int i = 0; i < 8; ++i) key[8 * w + i] = uint8_t(words[w] >> (8 * i));
        return key;
    }

    // Fixed domain-separation nonce for seeded random streams.
    static constexpr std::array<uint8_t, 12> kNonce = {'q', 'c', 'w', 'm', 'a', 'r', 'k', 'r', 'n', 'g', '0', '1'};

    Chacha20Stream stream_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qcw
