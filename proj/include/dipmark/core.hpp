#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dipmark/errors.hpp"

namespace dipmark {

// Token ids are dense indices 0..N-1 into the vocabulary. Callers
// pre-tokenize; there is no string tokenization beyond the whitespace
// corpus reader in lm.
using TokenId = std::uint32_t;

struct Vocabulary {
    std::uint32_t size = 0;
    std::vector<std::string> labels;  // optional; empty or exactly `size` entries

    void validate() const;
};

// A probability vector over the vocabulary. Construct through
// validate_distribution to enforce the invariants.
struct Distribution {
    std::vector<double> probs;

    std::uint32_t size() const { return static_cast<std::uint32_t>(probs.size()); }
    double operator[](std::size_t i) const { return probs[i]; }
};

// Validates a probability vector. Entries in [-1e-12, 0) are clamped to 0
// (floating-point dust from reweight CDF subtraction); the vector is then
// renormalized. Throws NegativeProbability / NotNormalized.
Distribution validate_distribution(std::vector<double> probs);

// An ordering of the token set; `order[rank] == token`.
struct Permutation {
    std::vector<TokenId> order;

    std::uint32_t size() const { return static_cast<std::uint32_t>(order.size()); }
    static Permutation identity(std::uint32_t n);
    bool is_valid() const;
};

// q with q.order[p.order[i]] == i; maps token id -> rank in p.
Permutation permutation_inverse(const Permutation& p);

struct SecretKey {
    std::vector<std::uint8_t> bytes;

    static SecretKey from_bytes(std::vector<std::uint8_t> b);
    static SecretKey from_hex(const std::string& hex);
};

struct WatermarkParams {
    double alpha = 0.45;       // reweight quantile
    double gamma = 0.5;        // red-green separator
    std::uint32_t window = 1;  // texture-key context length a

    void validate() const;
};

}  // namespace dipmark
