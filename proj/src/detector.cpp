#include "dipmark/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dipmark/numeric.hpp"
#include "dipmark/reweight.hpp"

namespace dipmark {

ThresholdMode threshold_mode_from_string(const std::string& s) {
    if (s == "kl") return ThresholdMode::kl;
    if (s == "approx") return ThresholdMode::approx;
    if (s == "exact") return ThresholdMode::exact;
    throw ConfigError("unknown threshold mode: " + s);
}

std::string threshold_mode_to_string(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::kl: return "kl";
        case ThresholdMode::approx: return "approx";
        case ThresholdMode::exact: return "exact";
    }
    return "?";
}

void DetectorConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
    if (!fixed_z && !(target_fpr > 0.0 && target_fpr < 1.0))
        throw ConfigError("target FPR must be in (0,1)");
}

double DetectorConfig::gamma_eff() const {
    return static_cast<double>(green_cutoff(vocab_size, gamma)) / vocab_size;
}

double kl_bernoulli(double p, double q) {
    auto term = [](double a, double b) {
        if (a == 0.0) return 0.0;
        return a * std::log(a / b);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::pair<std::uint32_t, std::uint32_t> green_count(std::span<const TokenId> tokens,
                                                    const DetectorConfig& config) {
    config.validate();
    const std::size_t n = tokens.size();
    if (n < 2) throw SequenceTooShort("detection needs at least 2 tokens");
    const std::uint32_t cutoff = green_cutoff(config.vocab_size, config.gamma);
    std::uint32_t greens = 0;
    for (std::size_t i = 1; i < n; ++i) {
        TextureKey tk = extract_texture_key(tokens, i, config.window);
        CipherSeed seed = derive_seed(config.key, tk);
        Permutation theta = permutation_from_seed(seed, config.vocab_size);
        std::uint32_t rank = token_rank(theta, tokens[i]);
        if (rank >= config.vocab_size)
            throw OutOfVocab("token id " + std::to_string(tokens[i]) +
                             " not in vocabulary of size " +
                             std::to_string(config.vocab_size));
        if (rank >= cutoff) ++greens;
    }
    return {static_cast<std::uint32_t>(n - 1), greens};
}

double phi_statistic(std::uint32_t m, std::uint32_t green, double gamma_eff) {
    if (m < 1) throw ConfigError("phi needs at least one scored position");
    return static_cast<double>(green) / m - (1.0 - gamma_eff);
}

double p_value_kl(std::uint32_t m, std::uint32_t green, double gamma_eff) {
    double q = 1.0 - gamma_eff;
    double p = static_cast<double>(green) / m;
    if (p <= q) return 1.0;
    return std::exp(-static_cast<double>(m) * kl_bernoulli(p, q));
}

double p_value_exact(std::uint32_t m, std::uint32_t green, double gamma_eff) {
    double q = 1.0 - gamma_eff;
    if (green == 0) return 1.0;
    if (q <= 0.0) return green == 0 ? 1.0 : std::numeric_limits<double>::min();
    if (q >= 1.0) return 1.0;
    // Sum the pmf from k up in log space via the term recurrence
    //   t_{j+1} = t_j * (m-j)/(j+1) * q/(1-q),
    // starting from lgamma-based log t_k. Always an upper tail, so the
    // result is in (0, 1].
    const std::uint32_t k = green;
    double log_tk = std::lgamma(static_cast<double>(m) + 1.0) -
                    std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(m - k) + 1.0) +
                    k * std::log(q) + (m - k) * std::log1p(-q);
    double term = std::exp(log_tk);
    NeumaierSum sum;
    sum.add(term);
    const double ratio_base = q / (1.0 - q);
    for (std::uint32_t j = k; j < m; ++j) {
        term *= static_cast<double>(m - j) / (j + 1) * ratio_base;
        sum.add(term);
        if (term < 1e-318) break;
    }
    double v = sum.value();
    return std::min(1.0, std::max(v, std::numeric_limits<double>::min()));
}

std::pair<double, double> z_test_baseline(std::uint32_t m, std::uint32_t green,
                                          double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ConfigError("z-test needs gamma in (0,1)");
    double mean = (1.0 - gamma) * m;
    double sd = std::sqrt(m * gamma * (1.0 - gamma));
    double z = (green - mean) / sd;
    return {z, normal_upper_tail(z)};
}

double threshold_for_fpr(std::uint32_t m, double gamma_eff, double target_fpr,
                         ThresholdMode mode) {
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw ConfigError("target FPR must be in (0,1)");
    if (m < 1) throw ConfigError("threshold needs m >= 1");
    const double q = 1.0 - gamma_eff;
    switch (mode) {
        case ThresholdMode::approx:
            return std::sqrt(std::log(1.0 / target_fpr) / (2.0 * m));
        case ThresholdMode::kl: {
            // exp(-m KL(q+t || q)) decreases in t on [0, gamma_eff]; bisect
            // for the smallest t at or below the target.
            double lo = 0.0, hi = gamma_eff;
            if (std::exp(-static_cast<double>(m) * kl_bernoulli(q + hi, q)) > target_fpr)
                return hi;  // even all-green cannot reach the target
            for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
                double mid = 0.5 * (lo + hi);
                double fpr = std::exp(-static_cast<double>(m) * kl_bernoulli(q + mid, q));
                (fpr <= target_fpr ? hi : lo) = mid;
            }
            return hi;
        }
        case ThresholdMode::exact: {
            for (std::uint32_t k = 0; k <= m; ++k) {
                if (p_value_exact(m, k, gamma_eff) <= target_fpr)
                    return static_cast<double>(k) / m - q;
            }
            return static_cast<double>(m) / m - q;  // never reachable: decision stays false
        }
    }
    throw ConfigError("unhandled threshold mode");
}

DetectionReport detect(std::span<const TokenId> tokens, const DetectorConfig& config) {
    auto [m, greens] = green_count(tokens, config);
    DetectionReport r;
    r.scored = m;
    r.green_count = greens;
    r.gamma_eff = config.gamma_eff();
    r.phi = phi_statistic(m, greens, r.gamma_eff);
    r.p_kl = p_value_kl(m, greens, r.gamma_eff);
    r.p_exact = p_value_exact(m, greens, r.gamma_eff);
    if (r.gamma_eff > 0.0 && r.gamma_eff < 1.0) {
        auto [z, pz] = z_test_baseline(m, greens, r.gamma_eff);
        r.z_baseline = z;
        r.p_z_baseline = pz;
    }
    r.threshold = config.fixed_z
                      ? *config.fixed_z
                      : threshold_for_fpr(m, r.gamma_eff, config.target_fpr, config.mode);
    r.decision = r.phi > r.threshold;
    return r;
}

}  // namespace dipmark
