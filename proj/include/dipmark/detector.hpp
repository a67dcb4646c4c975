#pragma once

#include <optional>

#include "dipmark/cipher.hpp"
#include "dipmark/core.hpp"

namespace dipmark {

// How the decision threshold z is chosen when no fixed z is given.
//   kl     : bisection on the exact KL concentration bound
//   approx : closed form sqrt(ln(1/p) / (2m)), the Hoeffding small-t bound
//   exact  : smallest k/m - (1-gamma_eff) whose exact binomial tail <= p
enum class ThresholdMode { kl, approx, exact };

ThresholdMode threshold_mode_from_string(const std::string& s);
std::string threshold_mode_to_string(ThresholdMode m);

struct DetectorConfig {
    SecretKey key;
    double gamma = 0.5;
    std::uint32_t window = 1;      // texture-key length a
    std::uint32_t vocab_size = 0;  // N; required
    std::optional<double> fixed_z;
    double target_fpr = 0.01;
    ThresholdMode mode = ThresholdMode::approx;

    void validate() const;
    // ceil(gamma*N)/N: the exact red fraction given the integer cutoff.
    double gamma_eff() const;
};

struct DetectionReport {
    std::uint32_t scored = 0;       // m = n - 1
    std::uint32_t green_count = 0;  // L_G
    double gamma_eff = 0.0;
    double phi = 0.0;
    double p_kl = 1.0;
    double p_exact = 1.0;
    double z_baseline = 0.0;
    double p_z_baseline = 1.0;
    double threshold = 0.0;
    bool decision = false;
};

// Single pass over positions 2..n: texture key from the preceding min(a, i-1)
// tokens, one cipher permutation per position, token green iff its rank is
// >= ceil(gamma*N). Returns (m, L_G). Throws SequenceTooShort for n < 2.
std::pair<std::uint32_t, std::uint32_t> green_count(std::span<const TokenId> tokens,
                                                    const DetectorConfig& config);

// L_G/m - (1 - gamma_eff)
double phi_statistic(std::uint32_t m, std::uint32_t green, double gamma_eff);

// exp(-m * KL(L_G/m || 1-gamma_eff)) above the null mean, else 1.
double p_value_kl(std::uint32_t m, std::uint32_t green, double gamma_eff);

// Exact upper tail P[Binomial(m, 1-gamma_eff) >= L_G].
double p_value_exact(std::uint32_t m, std::uint32_t green, double gamma_eff);

// Normal-approximation z-test, the red-green baseline this scheme replaces:
// z = (L_G - (1-gamma) m) / sqrt(m gamma (1-gamma)), p = upper normal tail.
std::pair<double, double> z_test_baseline(std::uint32_t m, std::uint32_t green,
                                          double gamma);

// Smallest phi threshold t whose false-positive probability under the chosen
// mode is <= target_fpr.
double threshold_for_fpr(std::uint32_t m, double gamma_eff, double target_fpr,
                         ThresholdMode mode);

// Composes the statistics; decision = (phi > z). Needs only the key and the
// token sequence: no prompt, no provider.
DetectionReport detect(std::span<const TokenId> tokens, const DetectorConfig& config);

// Bernoulli KL divergence with the 0 log 0 = 0 convention.
double kl_bernoulli(double p, double q);
// Upper tail of the standard normal.
double normal_upper_tail(double z);

}  // namespace dipmark
