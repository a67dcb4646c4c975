#include "dipmark/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dipmark/numeric.hpp"

namespace dipmark {

namespace {

void require_same_size(const Distribution& dist, const Permutation& theta) {
    if (dist.size() != theta.size())
        throw ConfigError("distribution and permutation sizes differ");
}

// Masses can come out a hair negative from CDF differencing; clamp the dust
// and renormalize through the shared validator.
Distribution finish(std::vector<double> masses) {
    return validate_distribution(std::move(masses));
}

double parse_param(const std::string& body, const std::string& name) {
    // body looks like "alpha=0.45" or "gamma=0.5,delta=1.5"
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad strategy parameter: " + item);
        if (item.substr(0, eq) == name) return std::stod(item.substr(eq + 1));
    }
    throw ConfigError("missing strategy parameter: " + name);
}

}  // namespace

ReweightStrategy ReweightStrategy::identity() { return {ReweightKind::identity}; }
ReweightStrategy ReweightStrategy::pw(double alpha) {
    return {ReweightKind::pw_alpha, alpha};
}
ReweightStrategy ReweightStrategy::dip(double alpha) {
    return {ReweightKind::dip, alpha};
}
ReweightStrategy ReweightStrategy::soft(double gamma, double delta) {
    ReweightStrategy s{ReweightKind::soft};
    s.gamma = gamma;
    s.delta = delta;
    return s;
}

ReweightStrategy ReweightStrategy::parse(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    ReweightStrategy s;
    if (head == "identity") {
        s = identity();
    } else if (head == "dip") {
        s = dip(parse_param(body, "alpha"));
    } else if (head == "pw") {
        s = pw(parse_param(body, "alpha"));
    } else if (head == "soft") {
        s = soft(parse_param(body, "gamma"), parse_param(body, "delta"));
    } else {
        throw ConfigError("unknown reweight strategy: " + spec);
    }
    s.validate();
    return s;
}

std::string ReweightStrategy::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case ReweightKind::identity: return "identity";
        case ReweightKind::pw_alpha: os << "pw:alpha=" << alpha; break;
        case ReweightKind::dip: os << "dip:alpha=" << alpha; break;
        case ReweightKind::soft: os << "soft:gamma=" << gamma << ",delta=" << delta; break;
    }
    return os.str();
}

void ReweightStrategy::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
}

std::uint32_t green_cutoff(std::uint32_t n, double gamma) {
    double x = std::ceil(gamma * static_cast<double>(n));
    auto r = static_cast<std::uint32_t>(x);
    return std::min(r, n);
}

Distribution pw_alpha_reweight(const Distribution& dist, const Permutation& theta,
                               double alpha) {
    require_same_size(dist, theta);
    if (alpha == 1.0)
        throw DegenerateAlpha("pw_alpha is undefined at alpha=1; use dip instead");
    if (alpha == 0.0) return dist;  // F^0(i) = S_i
    const std::uint32_t n = dist.size();
    std::vector<double> out(n, 0.0);
    NeumaierSum cum;
    double scale = 1.0 / (1.0 - alpha);
    double prev_f = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        cum.add(dist[theta.order[i]]);
        double s = i + 1 == n ? 1.0 : cum.value();
        double f = std::max(s - alpha, 0.0) * scale;
        out[theta.order[i]] = f - prev_f;
        prev_f = f;
    }
    return finish(std::move(out));
}

Distribution dip_reweight(const Distribution& dist, const Permutation& theta,
                          double alpha) {
    require_same_size(dist, theta);
    if (alpha == 0.0 || alpha == 1.0) return dist;  // F(i) = S_i exactly
    const std::uint32_t n = dist.size();
    const double lo = std::min(alpha, 1.0 - alpha);
    const double hi = std::max(alpha, 1.0 - alpha);
    std::vector<double> out(n, 0.0);
    NeumaierSum cum;
    double prev_f = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        cum.add(dist[theta.order[i]]);
        double s = i + 1 == n ? 1.0 : cum.value();
        double f = std::max(s - lo, 0.0) + std::max(s - hi, 0.0);
        out[theta.order[i]] = f - prev_f;
        prev_f = f;
    }
    return finish(std::move(out));
}

Distribution soft_reweight(const Distribution& dist, const Permutation& theta,
                           double gamma, double delta) {
    require_same_size(dist, theta);
    const std::uint32_t n = dist.size();
    const std::uint32_t cutoff = green_cutoff(n, gamma);
    const double boost = std::exp(delta);
    std::vector<double> out(n, 0.0);
    NeumaierSum denom;
    for (std::uint32_t i = 0; i < n; ++i) {
        double w = (i < cutoff ? 1.0 : boost) * dist[theta.order[i]];
        out[theta.order[i]] = w;
        denom.add(w);
    }
    double d = denom.value();
    for (double& w : out) w /= d;
    return finish(std::move(out));
}

Distribution apply_reweight(const ReweightStrategy& strategy, const Distribution& dist,
                            const Permutation& theta) {
    switch (strategy.kind) {
        case ReweightKind::identity: return dist;
        case ReweightKind::pw_alpha: return pw_alpha_reweight(dist, theta, strategy.alpha);
        case ReweightKind::dip: return dip_reweight(dist, theta, strategy.alpha);
        case ReweightKind::soft:
            return soft_reweight(dist, theta, strategy.gamma, strategy.delta);
    }
    throw ConfigError("unhandled reweight kind");
}

}  // namespace dipmark
