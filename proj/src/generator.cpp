#include "dipmark/generator.hpp"

#include "dipmark/numeric.hpp"

namespace dipmark {

void GenerationConfig::validate() const {
    params.validate();
    strategy.validate();
    if (length < 1) throw ConfigError("generation length must be >= 1");
}

TokenId SampleRng::sample(const Distribution& dist) {
    double u = next_unit();
    double acc = 0.0;
    std::uint32_t last_positive = 0;
    bool seen_positive = false;
    for (std::uint32_t i = 0; i < dist.size(); ++i) {
        double p = dist[i];
        if (p > 0.0) {
            last_positive = i;
            seen_positive = true;
        }
        acc += p;
        if (u < acc) return i;
    }
    // u landed in rounding slack past the last mass.
    if (!seen_positive) throw ProviderError("cannot sample from all-zero distribution");
    return last_positive;
}

namespace {

std::uint64_t dist_hash(const Distribution& d) {
    return fnv1a64(d.probs.data(), d.probs.size() * sizeof(double));
}

}  // namespace

GenerationTrace generate(const DistributionProvider& provider,
                         const GenerationConfig& config) {
    config.validate();
    GenerationTrace trace;
    trace.tokens.reserve(config.length);
    trace.steps.reserve(config.length);

    std::vector<TokenId> context(config.prompt);
    HistoryLog hist;
    SampleRng rng(config.rng_seed);
    const std::uint32_t n_vocab = provider.vocab_size();

    for (std::uint32_t step = 0; step < config.length; ++step) {
        Distribution original = next_distribution(provider, context);
        StepRecord rec;
        rec.original_dist_hash = dist_hash(original);

        bool watermark = !context.empty();
        if (watermark) {
            rec.texture_key =
                extract_texture_key(context, context.size(), config.params.window);
            if (hist.check_and_insert(rec.texture_key)) watermark = false;
        }
        // A promptless first step has no texture key; both cases fall back to
        // the original distribution and are flagged repeated in the trace.
        TokenId next;
        if (watermark) {
            CipherSeed seed = derive_seed(config.key, rec.texture_key);
            rec.cipher_digest = seed.digest;
            Permutation theta = permutation_from_seed(seed, n_vocab);
            Distribution reweighted = apply_reweight(config.strategy, original, theta);
            rec.watermarked_dist_hash = dist_hash(reweighted);
            next = rng.sample(reweighted);
        } else {
            rec.repeated = true;
            rec.watermarked_dist_hash = rec.original_dist_hash;
            next = rng.sample(original);
        }
        trace.tokens.push_back(next);
        trace.steps.push_back(std::move(rec));
        context.push_back(next);
    }
    return trace;
}

std::vector<TokenId> generate_unwatermarked(const DistributionProvider& provider,
                                            std::uint32_t length,
                                            std::span<const TokenId> prompt,
                                            std::uint64_t rng_seed) {
    std::vector<TokenId> context(prompt.begin(), prompt.end());
    SampleRng rng(rng_seed);
    std::vector<TokenId> out;
    out.reserve(length);
    for (std::uint32_t step = 0; step < length; ++step) {
        Distribution d = next_distribution(provider, context);
        TokenId next = rng.sample(d);
        out.push_back(next);
        context.push_back(next);
    }
    return out;
}

}  // namespace dipmark
