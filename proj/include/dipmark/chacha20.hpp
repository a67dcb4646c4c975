#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

namespace dipmark {

// ChaCha20 block function (RFC 8439) and a keystream reader on top of it.
//
// This is the normative random stream behind permutation_from_seed: the
// 32-byte cipher seed is the key, the nonce is all zero, and the block
// counter starts at 0. Keystream bytes are consumed as consecutive 64-bit
// little-endian words. Any reimplementation has to match this bit for bit
// or detection will not interoperate.

namespace chacha {

inline std::uint32_t rotl(std::uint32_t x, int n) {
    return (x << n) | (x >> (32 - n));
}

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c,
                          std::uint32_t& d) {
    a += b; d ^= a; d = rotl(d, 16);
    c += d; b ^= c; b = rotl(b, 12);
    a += b; d ^= a; d = rotl(d, 8);
    c += d; b ^= c; b = rotl(b, 7);
}

// One 64-byte block: key (32 bytes), 32-bit block counter, nonce (12 bytes).
inline void block(const std::uint8_t key[32], std::uint32_t counter,
                  const std::uint8_t nonce[12], std::uint8_t out[64]) {
    std::uint32_t st[16];
    st[0] = 0x61707865u; st[1] = 0x3320646eu; st[2] = 0x79622d32u; st[3] = 0x6b206574u;
    for (int i = 0; i < 8; ++i) {
        std::uint32_t w;
        std::memcpy(&w, key + 4 * i, 4);
        st[4 + i] = w;  // little-endian host assumed; see static_assert below
    }
    st[12] = counter;
    for (int i = 0; i < 3; ++i) {
        std::uint32_t w;
        std::memcpy(&w, nonce + 4 * i, 4);
        st[13 + i] = w;
    }
    std::uint32_t x[16];
    std::memcpy(x, st, sizeof(st));
    for (int round = 0; round < 10; ++round) {
        quarter_round(x[0], x[4], x[8],  x[12]);
        quarter_round(x[1], x[5], x[9],  x[13]);
        quarter_round(x[2], x[6], x[10], x[14]);
        quarter_round(x[3], x[7], x[11], x[15]);
        quarter_round(x[0], x[5], x[10], x[15]);
        quarter_round(x[1], x[6], x[11], x[12]);
        quarter_round(x[2], x[7], x[8],  x[13]);
        quarter_round(x[3], x[4], x[9],  x[14]);
    }
    for (int i = 0; i < 16; ++i) {
        x[i] += st[i];
        std::memcpy(out + 4 * i, &x[i], 4);
    }
}

static_assert(std::endian::native == std::endian::little,
              "keystream layout is specified little-endian");

}  // namespace chacha

// Deterministic u64 stream from a 32-byte seed (zero nonce, counter 0,1,...).
class KeyStream {
public:
    explicit KeyStream(const std::array<std::uint8_t, 32>& key) : key_(key) {}

    std::uint64_t next_u64() {
        if (pos_ + 8 > sizeof(buf_)) refill();
        std::uint64_t w;
        std::memcpy(&w, buf_ + pos_, 8);
        pos_ += 8;
        return w;
    }

private:
    void refill() {
        static const std::uint8_t zero_nonce[12] = {};
        chacha::block(key_.data(), counter_++, zero_nonce, buf_);
        pos_ = 0;
    }

    std::array<std::uint8_t, 32> key_;
    std::uint8_t buf_[64];
    std::uint32_t counter_ = 0;
    std::size_t pos_ = sizeof(buf_);
};

}  // namespace dipmark
