#pragma once

#include <string>

#include "dipmark/core.hpp"

namespace dipmark {

enum class ReweightKind { identity, pw_alpha, dip, soft };

// Strategy selector. Config strings:
//   "identity" | "dip:alpha=0.45" | "pw:alpha=0.45" | "soft:gamma=0.5,delta=1.5"
struct ReweightStrategy {
    ReweightKind kind = ReweightKind::dip;
    double alpha = 0.45;  // pw_alpha / dip
    double gamma = 0.5;   // soft
    double delta = 1.5;   // soft

    static ReweightStrategy identity();
    static ReweightStrategy pw(double alpha);
    static ReweightStrategy dip(double alpha);
    static ReweightStrategy soft(double gamma, double delta);
    static ReweightStrategy parse(const std::string& spec);
    std::string to_string() const;
    void validate() const;
};

// Red/green boundary: the first ceil(gamma*N) ranks of the permutation are
// red, the rest green. Shared by reweight, detector and generator so the
// split is bit-identical everywhere.
std::uint32_t green_cutoff(std::uint32_t n, double gamma);

// P_W^alpha: in permutation order, cumulative mass below alpha is zeroed and
// the rest rescaled by 1/(1-alpha). Rejects alpha == 1 (DegenerateAlpha);
// the dip composition handles that case exactly.
Distribution pw_alpha_reweight(const Distribution& dist, const Permutation& theta,
                               double alpha);

// DiP-reweight via the closed-form CDF
//   F(i) = max(S_i - alpha, 0) + max(S_i - (1-alpha), 0)
// with S_i the cumulative mass in permutation order. Equals
// (1-alpha)*P_W^alpha + alpha*P_W^(1-alpha) algebraically, but avoids both
// divisions and is exact at alpha in {0,1}.
Distribution dip_reweight(const Distribution& dist, const Permutation& theta,
                          double alpha);

// Red-green list baseline: green tokens (last N - ceil(gamma*N) ranks) get
// their probability scaled by e^delta, then everything renormalizes.
Distribution soft_reweight(const Distribution& dist, const Permutation& theta,
                           double gamma, double delta);

Distribution apply_reweight(const ReweightStrategy& strategy, const Distribution& dist,
                            const Permutation& theta);

}  // namespace dipmark
