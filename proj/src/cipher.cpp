#include "dipmark/cipher.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <memory>

#include "dipmark/chacha20.hpp"

namespace dipmark {

namespace {
void put_u32_le(std::string& out, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
}
}  // namespace

std::string CipherSeed::hex() const {
    static const char* k = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (std::uint8_t b : digest) {
        s.push_back(k[b >> 4]);
        s.push_back(k[b & 0xf]);
    }
    return s;
}

std::string encode_texture_key(const TextureKey& tk) {
    std::string out;
    out.reserve(4 + 4 * tk.tokens.size());
    put_u32_le(out, static_cast<std::uint32_t>(tk.tokens.size()));
    for (TokenId t : tk.tokens) put_u32_le(out, t);
    return out;
}

TextureKey extract_texture_key(std::span<const TokenId> context, std::size_t position,
                               std::uint32_t window) {
    if (position == 0) throw NoContext("no preceding tokens for texture key");
    if (position > context.size())
        throw NoContext("texture key position past end of context");
    std::size_t w = std::min<std::size_t>(window, position);
    TextureKey tk;
    tk.tokens.assign(context.begin() + (position - w), context.begin() + position);
    return tk;
}

CipherSeed derive_seed(const SecretKey& key, const TextureKey& tk) {
    // One context per thread, re-initialized per call; derivation is hot in
    // detection (one hash per scored position).
    thread_local std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
        EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("sha256 init failed");
    EVP_DigestUpdate(ctx.get(), key.bytes.data(), key.bytes.size());
    static const std::uint8_t sep = 0x01;
    EVP_DigestUpdate(ctx.get(), &sep, 1);
    for (TokenId t : tk.tokens) {
        std::uint8_t b[4];
        std::memcpy(b, &t, 4);
        EVP_DigestUpdate(ctx.get(), b, 4);
    }
    CipherSeed seed;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), seed.digest.data(), &len);
    if (len != 32) throw Error("sha256 digest length mismatch");
    return seed;
}

Permutation permutation_from_seed(const CipherSeed& seed, std::uint32_t n) {
    Permutation p = Permutation::identity(n);
    if (n <= 1) return p;
    KeyStream ks(seed.digest);
    for (std::uint32_t i = n - 1; i >= 1; --i) {
        std::uint64_t k = static_cast<std::uint64_t>(i) + 1;
        // 2^64 mod k; the top `rem` values of the u64 range are rejected so
        // that w mod k is exactly uniform. rem == 0 means k divides 2^64.
        std::uint64_t rem = (0 - k) % k;
        std::uint64_t bound = 0 - rem;  // floor(2^64/k)*k, wraps to 0 when rem==0
        std::uint64_t w;
        do {
            w = ks.next_u64();
        } while (rem != 0 && w >= bound);
        std::uint32_t j = static_cast<std::uint32_t>(w % k);
        std::swap(p.order[i], p.order[j]);
    }
    return p;
}

std::uint32_t token_rank(const Permutation& p, TokenId token) {
    for (std::uint32_t i = 0; i < p.order.size(); ++i)
        if (p.order[i] == token) return i;
    return p.size();
}

bool HistoryLog::check_and_insert(const TextureKey& tk) {
    auto [it, inserted] = seen_.insert(encode_texture_key(tk));
    return !inserted;
}

bool history_check_and_insert(HistoryLog& hist, const TextureKey& tk) {
    return hist.check_and_insert(tk);
}

}  // namespace dipmark
