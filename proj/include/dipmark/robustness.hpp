#pragma once

#include "dipmark/core.hpp"
#include "dipmark/detector.hpp"

namespace dipmark {

// Largest edit fraction under which detection provably survives.
struct CertifiedRadius {
    enum class Basis { length_varying, fixed_length };

    double epsilon0 = 0.0;
    Basis basis = Basis::length_varying;
    // The fixed-length bound is stated without the sqrt(n) factor its own
    // derivation produces; results computed from it carry this flag.
    bool caveat = false;
    double phi = 0.0;
    double z = 0.0;
    double gamma = 0.0;
    std::uint32_t window = 1;
};

// epsilon0 = (phi - z) / (2 + a - gamma + z), floored at 0. Holds with the
// edit fraction measured against the scored length; covers insertions and
// deletions (length may change).
CertifiedRadius certified_radius(double phi, double z, double gamma, std::uint32_t window);

// epsilon0 = (phi - z) / (a + 1), floored at 0; assumes edits keep the
// length fixed. Reported with the caveat flag (see CertifiedRadius).
CertifiedRadius certified_radius_fixed_length(double phi, double z, std::uint32_t window);

enum class AttackMode { substitute, insert, erase };

AttackMode attack_mode_from_string(const std::string& s);
std::string attack_mode_to_string(AttackMode m);

struct AttackSpec {
    AttackMode mode = AttackMode::substitute;
    double epsilon = 0.0;  // fraction of tokens to edit
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Applies round(epsilon * n) edits (round half to even) at uniformly random
// distinct positions. substitute: replace with a uniformly random different
// token; insert: add a uniformly random token; erase: delete the position.
// Deterministic given rng_seed.
std::vector<TokenId> attack(std::span<const TokenId> tokens, const AttackSpec& spec,
                            std::uint32_t vocab_size);

// Brute force over every single-token substitution and deletion; returns the
// maximum observed decrease in the green count. The worst case analysis says
// this never exceeds window + 1.
std::uint32_t worst_case_single_edit_drop(std::span<const TokenId> tokens,
                                          const DetectorConfig& config);

}  // namespace dipmark
