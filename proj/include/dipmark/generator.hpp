#pragma once

#include <random>

#include "dipmark/cipher.hpp"
#include "dipmark/core.hpp"
#include "dipmark/lm.hpp"
#include "dipmark/reweight.hpp"

namespace dipmark {

struct GenerationConfig {
    WatermarkParams params;
    ReweightStrategy strategy;
    SecretKey key;
    std::uint32_t length = 1;
    std::vector<TokenId> prompt;
    std::uint64_t rng_seed = 0;  // sampling randomness only, not the cipher

    void validate() const;
};

struct StepRecord {
    TextureKey texture_key;
    bool repeated = false;  // sampled from the original distribution
    std::array<std::uint8_t, 32> cipher_digest{};  // zero when repeated
    std::uint64_t original_dist_hash = 0;
    std::uint64_t watermarked_dist_hash = 0;
};

struct GenerationTrace {
    std::vector<TokenId> tokens;
    std::vector<StepRecord> steps;
};

// Deterministic sampler; a fully specified engine plus inverse-CDF lookup so
// sequences reproduce bit-exactly across platforms.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : eng_(seed) {}
    double next_unit() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    std::uint64_t next_u64() { return eng_(); }
    TokenId sample(const Distribution& dist);

private:
    std::mt19937_64 eng_;
};

// One pass of the watermarked generation loop. Per step: texture key from
// the last min(a, available) tokens of prompt+generated; a repeated texture
// key (or the promptless first step) samples from the original distribution,
// a fresh one derives the cipher and samples from the reweighted
// distribution. The history log starts empty on every call.
GenerationTrace generate(const DistributionProvider& provider, const GenerationConfig& config);

// Plain ancestral sampling; no cipher, no history.
std::vector<TokenId> generate_unwatermarked(const DistributionProvider& provider,
                                            std::uint32_t length,
                                            std::span<const TokenId> prompt,
                                            std::uint64_t rng_seed);

}  // namespace dipmark
