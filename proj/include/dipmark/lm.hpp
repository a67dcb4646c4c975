#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dipmark/core.hpp"

namespace dipmark {

// Source of next-token distributions; the "language model" at desk scale.
// Implementations must be deterministic in the context and are immutable
// once built, so sharing across threads is safe.
class DistributionProvider {
public:
    virtual ~DistributionProvider() = default;
    virtual std::uint32_t vocab_size() const = 0;
    virtual Distribution next(std::span<const TokenId> context) const = 0;
};

// Validates the provider output and wraps provider failures in ProviderError.
Distribution next_distribution(const DistributionProvider& provider,
                               std::span<const TokenId> context);

// Fixed per-position distributions, cycled when exhausted. Step index is the
// context length modulo the table size, so with an empty prompt step i uses
// row i. Deterministic test fixture.
class TableModel : public DistributionProvider {
public:
    TableModel(std::uint32_t vocab_size, std::vector<Distribution> steps);
    static TableModel uniform(std::uint32_t vocab_size);

    std::uint32_t vocab_size() const override { return vocab_size_; }
    Distribution next(std::span<const TokenId> context) const override;
    const std::vector<Distribution>& steps() const { return steps_; }

private:
    std::uint32_t vocab_size_;
    std::vector<Distribution> steps_;
};

// Additive-smoothing n-gram model:
//   next(ctx)[t] = (count(tail, t) + lambda) / (total(tail) + lambda * N)
// where tail is the last order-1 context tokens. Unseen contexts give the
// uniform distribution.
class NGramModel : public DistributionProvider {
public:
    NGramModel(std::uint32_t order, double lambda, std::uint32_t vocab_size);

    std::uint32_t vocab_size() const override { return vocab_size_; }
    Distribution next(std::span<const TokenId> context) const override;

    std::uint32_t order() const { return order_; }
    double lambda() const { return lambda_; }

    void add_count(std::span<const TokenId> context_tail, TokenId next, std::uint32_t c = 1);
    // Builds the lookup index; required before next(), after which the model
    // is immutable and safe to share across threads.
    void finalize();
    // context key -> (token -> count); ordered for stable serialization
    const std::map<std::vector<TokenId>, std::map<TokenId, std::uint32_t>>& counts() const {
        return counts_;
    }

private:
    std::uint32_t order_;
    double lambda_;
    std::uint32_t vocab_size_;
    bool finalized_ = false;
    std::map<std::vector<TokenId>, std::map<TokenId, std::uint32_t>> counts_;
    std::unordered_map<std::string, const std::map<TokenId, std::uint32_t>*> index_;
    std::unordered_map<std::string, std::uint64_t> totals_;
};

// Aggregates all windows of `order` consecutive tokens. vocab_size 0 means
// infer as max id + 1.
NGramModel ngram_train(const std::vector<std::vector<TokenId>>& corpus, std::uint32_t order,
                       double lambda, std::uint32_t vocab_size = 0);

// Keeps the k largest entries (ties to the lower token id), zeroes the rest,
// renormalizes. Mirrors scoring against an API that only exposes top-k
// probabilities.
Distribution top_k_truncate(const Distribution& dist, std::uint32_t k);

// Adapter that truncates another provider's output to its top k tokens, the
// way an API exposing only top-k probabilities would look to the sampler.
class TopKProvider : public DistributionProvider {
public:
    TopKProvider(std::shared_ptr<DistributionProvider> inner, std::uint32_t k);

    std::uint32_t vocab_size() const override { return inner_->vocab_size(); }
    Distribution next(std::span<const TokenId> context) const override {
        return top_k_truncate(inner_->next(context), k_);
    }
    std::uint32_t k() const { return k_; }
    const DistributionProvider& inner() const { return *inner_; }

private:
    std::shared_ptr<DistributionProvider> inner_;
    std::uint32_t k_;
};

struct TokenizedCorpus {
    Vocabulary vocab;
    std::vector<std::vector<TokenId>> sequences;  // one per input line
    std::vector<TokenId> flat;                    // whole file in order
};

// Whitespace tokenizer; distinct words get dense ids in first-appearance
// order.
TokenizedCorpus tokenize_corpus_text(const std::string& text);
TokenizedCorpus load_corpus_file(const std::string& path);

// Model (de)serialization: {"type":"ngram"|"table", "vocab_size":N, ...}.
std::string model_to_json(const DistributionProvider& provider);
std::unique_ptr<DistributionProvider> model_from_json(const std::string& json_text);
std::unique_ptr<DistributionProvider> load_model_file(const std::string& path);
void save_model_file(const DistributionProvider& provider, const std::string& path);

}  // namespace dipmark
