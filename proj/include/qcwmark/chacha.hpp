#pragma once

#include <array>
#include <cstdint>
#include <cstring>

namespace qcw {

// ChaCha20 block function and keystream generator (RFC 8439).
// State layout: 4 constant words, 8 key words, block counter, 3 nonce words,
// all little-endian.

namespace detail {

inline uint32_t rotl32(uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void chacha_quarter(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
    a += b; d ^= a; d = rotl32(d, 16);
    c += d; b ^= c; b = rotl32(b, 12);
    a += b; d ^= a; d = rotl32(d, 8);
    c += d; b ^= c; b = rotl32(b, 7);
}

inline uint32_t load_le32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

} // namespace detail

/// Computes one 64-byte ChaCha20 keystream block.
inline std::array<uint8_t, 64> chacha20_block(const std::array<uint8_t, 32>& key,
                                              uint32_t counter,
                                              const std::array<uint8_t, 12>& nonce) {
    using namespace detail;
    uint32_t state[16];
    state[0] = 0x61707865u;
    state[1] = 0x3320646eu;
    state[2] = 0x79622d32u;
    state[3] = 0x6b206574u;
    for (int i = 0; i < 8; ++i) state[4 + i] = load_le32(key.data() + 4 * i);
    state[12] = counter;
    for (int i = 0; i < 3; ++i) state[13 + i] = load_le32(nonce.data() + 4 * i);

    uint32_t x[16];
    std::memcpy(x, state, sizeof(x));
    for (int round = 0; round < 10; ++round) {
        chacha_quarter(x[0], x[4], x[8], x[12]);
        chacha_quarter(x[1], x[5], x[9], x[13]);
        chacha_quarter(x[2], x[6], x[10], x[14]);
        chacha_quarter(x[3], x[7], x[11], x[15]);
        chacha_quarter(x[0], x[5], x[10], x[15]);
        chacha_quarter(x[1], x[6], x[11], x[12]);
        chacha_quarter(x[2], x[7], x[8], x[13]);
        chacha_quarter(x[3], x[4], x[9], x[14]);
    }
    std::array<uint8_t, 64> out;
    for (int i = 0; i < 16; ++i) {
        uint32_t w = x[i] + state[i];
        out[4 * i + 0] = uint8_t(w);
        out[4 * i + 1] = uint8_t(w >> 8);
        out[4 * i + 2] = uint8_t(w >> 16);
        out[4 * i + 3] = uint8_t(w >> 24);
    }
    return out;
}

/// Incremental ChaCha20 keystream. The block counter starts at 1, matching
/// the RFC 8439 encryption convention, so outputs line up with the published
/// test vectors.
class Chacha20Stream {
public:
    Chacha20Stream(const std::array<uint8_t, 32>& key,
                   const std::array<uint8_t, 12>& nonce,
                   uint32_t initial_counter = 1)
        : key_(key), nonce_(nonce), counter_(initial_counter) {}

    uint8_t next_byte() {
        if (pos_ == 64) {
            block_ = chacha20_block(key_, counter_++, nonce_);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    void fill(uint8_t* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = next_byte();
    }

    uint64_t next_u64() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(next_byte()) << (8 * i);
        return v;
    }

private:
    std::array<uint8_t, 32> key_;
    std::array<uint8_t, 12> nonce_;
    uint32_t counter_;
    std::array<uint8_t, 64> block_{};
    std::size_t pos_ = 64;
};

} // namespace qcw
