#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dipmark/bench.hpp"
#include "dipmark/detector.hpp"
#include "dipmark/generator.hpp"
#include "dipmark/lm.hpp"
#include "dipmark/robustness.hpp"

namespace py = pybind11;
using namespace dipmark;

namespace {

SecretKey key_from_hex(const std::string& hex) { return SecretKey::from_hex(hex); }

Permutation perm_from(const std::vector<TokenId>& order) {
    Permutation p{order};
    if (!p.is_valid()) throw ConfigError("not a permutation of 0..N-1");
    return p;
}

DetectorConfig make_detector(const std::string& key_hex, double gamma,
                             std::uint32_t window, std::uint32_t vocab_size,
                             double target_fpr, const std::string& mode) {
    DetectorConfig cfg;
    cfg.key = key_from_hex(key_hex);
    cfg.gamma = gamma;
    cfg.window = window;
    cfg.vocab_size = vocab_size;
    cfg.target_fpr = target_fpr;
    cfg.mode = threshold_mode_from_string(mode);
    return cfg;
}

py::dict report_dict(const DetectionReport& r) {
    py::dict d;
    d["scored"] = r.scored;
    d["green_count"] = r.green_count;
    d["gamma_eff"] = r.gamma_eff;
    d["phi"] = r.phi;
    d["p_kl"] = r.p_kl;
    d["p_exact"] = r.p_exact;
    d["z_baseline"] = r.z_baseline;
    d["p_z_baseline"] = r.p_z_baseline;
    d["threshold"] = r.threshold;
    d["decision"] = r.decision;
    return d;
}

}  // namespace

PYBIND11_MODULE(_dipmark, m) {
    m.doc() = "DiPmark distribution-preserving watermark core";

    py::register_exception<Error>(m, "DipmarkError");

    // reweight strategies over plain probability lists
    m.def(
        "dip_reweight",
        [](std::vector<double> probs, const std::vector<TokenId>& order, double alpha) {
            return dip_reweight(validate_distribution(std::move(probs)), perm_from(order),
                                alpha)
                .probs;
        },
        py::arg("probs"), py::arg("order"), py::arg("alpha"));
    m.def(
        "pw_alpha_reweight",
        [](std::vector<double> probs, const std::vector<TokenId>& order, double alpha) {
            return pw_alpha_reweight(validate_distribution(std::move(probs)),
                                     perm_from(order), alpha)
                .probs;
        },
        py::arg("probs"), py::arg("order"), py::arg("alpha"));
    m.def(
        "soft_reweight",
        [](std::vector<double> probs, const std::vector<TokenId>& order, double gamma,
           double delta) {
            return soft_reweight(validate_distribution(std::move(probs)),
                                 perm_from(order), gamma, delta)
                .probs;
        },
        py::arg("probs"), py::arg("order"), py::arg("gamma"), py::arg("delta"));
    m.def(
        "top_k_truncate",
        [](std::vector<double> probs, std::uint32_t k) {
            return top_k_truncate(validate_distribution(std::move(probs)), k).probs;
        },
        py::arg("probs"), py::arg("k"));

    // cipher
    m.def(
        "derive_seed_hex",
        [](const std::string& key_hex, const std::vector<TokenId>& texture) {
            return derive_seed(key_from_hex(key_hex), TextureKey{texture}).hex();
        },
        py::arg("key_hex"), py::arg("texture_key"));
    m.def(
        "permutation_from_key",
        [](const std::string& key_hex, const std::vector<TokenId>& texture,
           std::uint32_t n) {
            return permutation_from_seed(derive_seed(key_from_hex(key_hex),
                                                     TextureKey{texture}),
                                         n)
                .order;
        },
        py::arg("key_hex"), py::arg("texture_key"), py::arg("n"));

    // statistics
    m.def("phi_statistic", &phi_statistic, py::arg("m"), py::arg("green"),
          py::arg("gamma_eff"));
    m.def("p_value_kl", &p_value_kl, py::arg("m"), py::arg("green"), py::arg("gamma_eff"));
    m.def("p_value_exact", &p_value_exact, py::arg("m"), py::arg("green"),
          py::arg("gamma_eff"));
    m.def(
        "z_test_baseline",
        [](std::uint32_t m, std::uint32_t green, double gamma) {
            auto [z, p] = z_test_baseline(m, green, gamma);
            return py::make_tuple(z, p);
        },
        py::arg("m"), py::arg("green"), py::arg("gamma"));
    m.def(
        "threshold_for_fpr",
        [](std::uint32_t m, double gamma_eff, double fpr, const std::string& mode) {
            return threshold_for_fpr(m, gamma_eff, fpr, threshold_mode_from_string(mode));
        },
        py::arg("m"), py::arg("gamma_eff"), py::arg("target_fpr"),
        py::arg("mode") = "kl");

    // generation and detection against a model file
    m.def(
        "generate",
        [](const std::string& model_path, const std::string& key_hex,
           const std::string& strategy, std::uint32_t length,
           const std::vector<TokenId>& prompt, std::uint64_t seed, std::uint32_t window) {
            auto provider = load_model_file(model_path);
            GenerationConfig cfg;
            cfg.key = key_from_hex(key_hex);
            cfg.strategy = ReweightStrategy::parse(strategy);
            cfg.params.window = window;
            cfg.length = length;
            cfg.prompt = prompt;
            cfg.rng_seed = seed;
            return generate(*provider, cfg).tokens;
        },
        py::arg("model_path"), py::arg("key_hex"), py::arg("strategy"), py::arg("length"),
        py::arg("prompt") = std::vector<TokenId>{}, py::arg("seed") = 0,
        py::arg("window") = 1);
    m.def(
        "detect",
        [](const std::vector<TokenId>& tokens, const std::string& key_hex,
           std::uint32_t vocab_size, double gamma, std::uint32_t window, double fpr,
           const std::string& mode) {
            auto cfg = make_detector(key_hex, gamma, window, vocab_size, fpr, mode);
            return report_dict(detect(tokens, cfg));
        },
        py::arg("tokens"), py::arg("key_hex"), py::arg("vocab_size"),
        py::arg("gamma") = 0.5, py::arg("window") = 1, py::arg("fpr") = 0.01,
        py::arg("mode") = "exact");

    // robustness
    m.def(
        "certified_radius",
        [](double phi, double z, double gamma, std::uint32_t window) {
            return certified_radius(phi, z, gamma, window).epsilon0;
        },
        py::arg("phi"), py::arg("z"), py::arg("gamma") = 0.5, py::arg("window") = 1);
    m.def(
        "certified_radius_fixed_length",
        [](double phi, double z, std::uint32_t window) {
            return certified_radius_fixed_length(phi, z, window).epsilon0;
        },
        py::arg("phi"), py::arg("z"), py::arg("window") = 1);
    m.def(
        "attack",
        [](const std::vector<TokenId>& tokens, const std::string& mode, double epsilon,
           std::uint64_t seed, std::uint32_t vocab_size) {
            AttackSpec spec{attack_mode_from_string(mode), epsilon, seed};
            return attack(tokens, spec, vocab_size);
        },
        py::arg("tokens"), py::arg("mode"), py::arg("epsilon"), py::arg("seed"),
        py::arg("vocab_size"));

    // preservation checks
    m.def(
        "preserve_exact",
        [](double alpha, std::vector<double> probs) {
            return preserve_exact(alpha, validate_distribution(std::move(probs)));
        },
        py::arg("alpha"), py::arg("probs"));
    m.def("preserve_mc", [](double alpha, std::uint32_t n, std::vector<double> probs,
                            std::uint64_t samples, std::uint64_t seed) {
        return preserve_mc(alpha, n, validate_distribution(std::move(probs)), samples,
                           seed);
    });

    m.attr("__version__") = DIPMARK_VERSION;
}
