#include "dipmark/core.hpp"

#include <cmath>

#include "dipmark/numeric.hpp"

namespace dipmark {

namespace {
constexpr double kClampWindow = 1e-12;
constexpr double kNormTolerance = 1e-9;

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

void Vocabulary::validate() const {
    if (size < 1) throw ConfigError("vocabulary size must be >= 1");
    if (!labels.empty() && labels.size() != size)
        throw ConfigError("vocabulary labels must have exactly `size` entries");
}

Distribution validate_distribution(std::vector<double> probs) {
    if (probs.empty()) throw NotNormalized("empty probability vector");
    bool clamped = false;
    for (double& p : probs) {
        if (p < 0.0) {
            if (p < -kClampWindow)
                throw NegativeProbability("probability entry " + std::to_string(p) +
                                          " below -1e-12");
            p = 0.0;
            clamped = true;
        }
    }
    NeumaierSum s;
    for (double p : probs) s.add(p);
    double sum = s.value();
    if (std::abs(sum - 1.0) > kNormTolerance)
        throw NotNormalized("probabilities sum to " + std::to_string(sum));
    // Renormalize only when something changed; keeps validation idempotent.
    if (clamped || std::abs(sum - 1.0) > 1e-12) {
        for (double& p : probs) p /= sum;
    }
    return Distribution{std::move(probs)};
}

Permutation Permutation::identity(std::uint32_t n) {
    Permutation p;
    p.order.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) p.order[i] = i;
    return p;
}

bool Permutation::is_valid() const {
    std::vector<bool> seen(order.size(), false);
    for (TokenId t : order) {
        if (t >= order.size() || seen[t]) return false;
        seen[t] = true;
    }
    return true;
}

Permutation permutation_inverse(const Permutation& p) {
    Permutation q;
    q.order.resize(p.order.size());
    for (std::uint32_t i = 0; i < p.order.size(); ++i) q.order[p.order[i]] = i;
    return q;
}

SecretKey SecretKey::from_bytes(std::vector<std::uint8_t> b) {
    if (b.size() < 16) throw BadKey("secret key must be at least 16 bytes");
    return SecretKey{std::move(b)};
}

SecretKey SecretKey::from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw BadKey("hex key must have even length");
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw BadKey("invalid hex character in key");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return from_bytes(std::move(out));
}

void WatermarkParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    if (window < 1) throw ConfigError("window must be >= 1");
}

}  // namespace dipmark
