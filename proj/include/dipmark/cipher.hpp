#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>

#include "dipmark/core.hpp"

namespace dipmark {

// Window of up to `a` most recent context tokens, oldest first. Seeds the
// per-step cipher permutation.
struct TextureKey {
    std::vector<TokenId> tokens;

    bool operator==(const TextureKey&) const = default;
};

// 32-byte SHA-256 output of (secret key, texture key).
struct CipherSeed {
    std::array<std::uint8_t, 32> digest{};

    std::string hex() const;
};

// Canonical byte encoding: u32 LE token count, then each id as u32 LE.
// Length-prefixed so [3,4] can never collide with [3] followed by [4].
std::string encode_texture_key(const TextureKey& tk);

// The min(a, position) tokens of `context` immediately preceding `position`,
// oldest first. Shorter-than-a windows near the sequence start are used
// as-is. Throws NoContext when position == 0.
TextureKey extract_texture_key(std::span<const TokenId> context, std::size_t position,
                               std::uint32_t window);

// SHA-256(key bytes || 0x01 || token ids as u32 LE). The 0x01 separates the
// key from the token encoding. Normative; must be bit-exact across
// implementations.
CipherSeed derive_seed(const SecretKey& key, const TextureKey& tk);

// Deterministic Fisher-Yates shuffle of [0..N-1] driven by the ChaCha20
// keystream of `seed` (see chacha20.hpp). For i = N-1 down to 1 the swap
// index j in [0, i] is drawn by rejection sampling on u64 words: with
// k = i+1, reject w >= floor(2^64/k)*k, then j = w mod k. Unbiased over the
// stream's output space.
Permutation permutation_from_seed(const CipherSeed& seed, std::uint32_t n);

// Rank of `token` in the permutation (0-based); N if absent.
std::uint32_t token_rank(const Permutation& p, TokenId token);

// Texture keys already used in one generation run. Insertion-only; make a
// fresh log per run.
class HistoryLog {
public:
    // True if tk was already present (no mutation); otherwise inserts it
    // and returns false.
    bool check_and_insert(const TextureKey& tk);
    std::size_t size() const { return seen_.size(); }
    void clear() { seen_.clear(); }

private:
    std::unordered_set<std::string> seen_;
};

bool history_check_and_insert(HistoryLog& hist, const TextureKey& tk);

}  // namespace dipmark
