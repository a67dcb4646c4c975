#include "dipmark/robustness.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <random>

namespace dipmark {

CertifiedRadius certified_radius(double phi, double z, double gamma,
                                 std::uint32_t window) {
    if (window < 1) throw ConfigError("window must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    CertifiedRadius r;
    r.basis = CertifiedRadius::Basis::length_varying;
    r.phi = phi;
    r.z = z;
    r.gamma = gamma;
    r.window = window;
    r.epsilon0 = std::max(0.0, (phi - z) / (2.0 + window - gamma + z));
    return r;
}

CertifiedRadius certified_radius_fixed_length(double phi, double z,
                                              std::uint32_t window) {
    if (window < 1) throw ConfigError("window must be >= 1");
    CertifiedRadius r;
    r.basis = CertifiedRadius::Basis::fixed_length;
    r.caveat = true;
    r.phi = phi;
    r.z = z;
    r.window = window;
    r.epsilon0 = std::max(0.0, (phi - z) / (window + 1.0));
    return r;
}

AttackMode attack_mode_from_string(const std::string& s) {
    if (s == "substitute") return AttackMode::substitute;
    if (s == "insert") return AttackMode::insert;
    if (s == "delete") return AttackMode::erase;
    throw ConfigError("unknown attack mode: " + s);
}

std::string attack_mode_to_string(AttackMode m) {
    switch (m) {
        case AttackMode::substitute: return "substitute";
        case AttackMode::insert: return "insert";
        case AttackMode::erase: return "delete";
    }
    return "?";
}

void AttackSpec::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0,1]");
}

namespace {

// round half to even, the default fe rounding mode
std::uint32_t round_even(double x) {
    return static_cast<std::uint32_t>(std::nearbyint(x));
}

// k distinct positions from [0, n), in descending order so edits can be
// applied without invalidating later indices.
std::vector<std::size_t> pick_positions(std::size_t n, std::size_t k,
                                        std::mt19937_64& eng) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + eng() % (n - i);
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end(), std::greater<>());
    return all;
}

}  // namespace

std::vector<TokenId> attack(std::span<const TokenId> tokens, const AttackSpec& spec,
                            std::uint32_t vocab_size) {
    spec.validate();
    if (tokens.empty()) throw SequenceTooShort("cannot attack an empty sequence");
    if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
    const std::size_t n = tokens.size();
    std::size_t k = round_even(spec.epsilon * static_cast<double>(n));
    k = std::min(k, n);
    std::vector<TokenId> out(tokens.begin(), tokens.end());
    if (k == 0) return out;
    std::mt19937_64 eng(spec.rng_seed);
    auto positions = pick_positions(n, k, eng);
    for (std::size_t pos : positions) {
        switch (spec.mode) {
            case AttackMode::substitute: {
                if (vocab_size > 1) {
                    // uniform over the other N-1 tokens
                    TokenId repl = static_cast<TokenId>(eng() % (vocab_size - 1));
                    if (repl >= out[pos]) ++repl;
                    out[pos] = repl;
                }
                break;
            }
            case AttackMode::insert: {
                TokenId t = static_cast<TokenId>(eng() % vocab_size);
                out.insert(out.begin() + pos, t);
                break;
            }
            case AttackMode::erase:
                out.erase(out.begin() + pos);
                break;
        }
    }
    return out;
}

std::uint32_t worst_case_single_edit_drop(std::span<const TokenId> tokens,
                                          const DetectorConfig& config) {
    if (tokens.size() < 2) throw SequenceTooShort("need at least 2 tokens");
    auto [m0, base] = green_count(tokens, config);
    (void)m0;
    std::uint32_t worst = 0;
    std::vector<TokenId> work(tokens.begin(), tokens.end());
    // substitutions
    for (std::size_t pos = 0; pos < work.size(); ++pos) {
        TokenId orig = work[pos];
        for (TokenId repl = 0; repl < config.vocab_size; ++repl) {
            if (repl == orig) continue;
            work[pos] = repl;
            auto [m1, g] = green_count(work, config);
            (void)m1;
            if (g < base) worst = std::max(worst, base - g);
        }
        work[pos] = orig;
    }
    // deletions
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        std::vector<TokenId> del(tokens.begin(), tokens.end());
        del.erase(del.begin() + pos);
        if (del.size() < 2) continue;
        auto [m1, g] = green_count(del, config);
        (void)m1;
        if (g < base) worst = std::max(worst, base - g);
    }
    return worst;
}

}  // namespace dipmark
