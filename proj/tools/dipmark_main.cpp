#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dipmark/bench.hpp"
#include "dipmark/detector.hpp"
#include "dipmark/generator.hpp"
#include "dipmark/io.hpp"
#include "dipmark/robustness.hpp"

namespace {

using dipmark::TokenId;
using nlohmann::json;

constexpr const char* kCipherEncoding =
    "dipmark-cipher-v1: sha256(key|0x01|le32-ids); chacha20 rfc8439 zero-nonce ctr0; "
    "fisher-yates u64le rejection";

std::vector<TokenId> parse_prompt(const std::string& spec) {
    if (spec.empty()) return {};
    // Inline list when it looks like integers, otherwise a file path.
    bool inline_ids = spec.find_first_not_of("0123456789, \t") == std::string::npos;
    if (inline_ids) {
        std::string normalized = spec;
        for (char& c : normalized)
            if (c == ',') c = ' ';
        auto seqs = dipmark::parse_token_sequences(normalized);
        return seqs.empty() ? std::vector<TokenId>{} : seqs.front();
    }
    auto seqs = dipmark::read_token_file(spec);
    std::vector<TokenId> out;
    for (auto& s : seqs) out.insert(out.end(), s.begin(), s.end());
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        dipmark::atomic_write_file(out_path, text);
    }
}

json report_to_json(const dipmark::DetectionReport& r) {
    json j;
    j["scored"] = r.scored;
    j["green_count"] = r.green_count;
    j["gamma_eff"] = r.gamma_eff;
    j["phi"] = r.phi;
    j["p_kl"] = r.p_kl;
    j["p_exact"] = r.p_exact;
    j["z_baseline"] = r.z_baseline;
    j["p_z_baseline"] = r.p_z_baseline;
    j["threshold"] = r.threshold;
    j["decision"] = r.decision;
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"DiPmark distribution-preserving watermark toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version",
                         std::string("dipmark ") + DIPMARK_VERSION + "\n" + kCipherEncoding);

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "watermarked sampling from a model file");
    std::string g_model, g_key, g_strategy = "dip:alpha=0.45", g_prompt, g_out;
    std::uint32_t g_window = 1, g_len = 260, g_num = 1;
    std::uint64_t g_seed = 0;
    bool g_trace = false;
    gen->add_option("--model", g_model, "model JSON file")->required();
    gen->add_option("--key", g_key, "secret key, hex, >= 16 bytes")->required();
    gen->add_option("--strategy", g_strategy, "identity|dip:alpha=..|pw:alpha=..|soft:gamma=..,delta=..");
    gen->add_option("--window", g_window, "texture key length a");
    gen->add_option("--len", g_len, "tokens per sequence");
    gen->add_option("--num", g_num, "number of sequences");
    gen->add_option("--prompt-ids", g_prompt, "inline ids or file path");
    gen->add_option("--seed", g_seed, "sampling seed (not the cipher)");
    gen->add_option("--out", g_out, "output JSONL (default stdout)");
    gen->add_flag("--trace", g_trace, "include per-step trace");

    // ---- detect ----
    auto* det = app.add_subcommand("detect", "single-pass watermark detection");
    std::string d_key, d_input, d_out, d_mode = "exact", d_model;
    double d_gamma = 0.5, d_fpr = 0.01;
    std::uint32_t d_window = 1, d_vocab = 0;
    std::optional<double> d_z;
    det->add_option("--key", d_key)->required();
    det->add_option("--input", d_input, "tokens JSONL / plain lines")->required();
    det->add_option("--gamma", d_gamma);
    det->add_option("--window", d_window);
    det->add_option("--vocab-size", d_vocab, "vocabulary size N");
    det->add_option("--model", d_model, "model file (alternative way to supply N)");
    det->add_option("--fpr", d_fpr, "target false positive rate");
    det->add_option("--mode", d_mode, "kl|approx|exact threshold mode");
    det->add_option("--z", [&d_z](const std::vector<std::string>& v) {
        d_z = std::stod(v.at(0));
        return true;
    }, "fixed phi threshold (overrides --fpr)");
    det->add_option("--out", d_out, "output JSONL (default stdout)");

    // ---- certify ----
    auto* cert = app.add_subcommand("certify", "certified robustness radius");
    double c_phi = 0.0, c_z = 0.0, c_gamma = 0.5;
    std::uint32_t c_window = 1;
    std::string c_report;
    bool c_fixed_len = false;
    auto* phi_opt = cert->add_option("--phi", c_phi, "green token ratio");
    cert->add_option("--z", c_z, "decision threshold");
    cert->add_option("--gamma", c_gamma);
    cert->add_option("--window", c_window);
    cert->add_option("--report", c_report, "detection report JSONL (reads phi)");
    cert->add_flag("--fixed-length", c_fixed_len, "fixed-length radius (phi-z)/(a+1)");

    // ---- attack ----
    auto* att = app.add_subcommand("attack", "random token edits");
    std::string a_input, a_out, a_mode = "substitute";
    double a_eps = 0.1;
    std::uint64_t a_seed = 0;
    std::uint32_t a_vocab = 0;
    att->add_option("--input", a_input)->required();
    att->add_option("--eps", a_eps, "fraction of tokens to edit");
    att->add_option("--mode", a_mode, "substitute|insert|delete");
    att->add_option("--seed", a_seed);
    att->add_option("--vocab-size", a_vocab, "vocabulary size N")->required();
    att->add_option("--out", a_out, "output JSONL (default stdout)");

    // ---- bench ----
    auto* ben = app.add_subcommand("bench", "experiment harness");
    std::string b_experiment, b_config, b_out;
    ben->add_option("experiment", b_experiment,
                    "preserve_exact|preserve_mc|calibrate|detectability|resilience|"
                    "gamma_sweep|timing")
        ->required();
    ben->add_option("--config", b_config, "experiment config JSON file");
    ben->add_option("--out", b_out, "output directory for metrics + manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints usage or help text
        return code == 0 ? 0 : 1;
    }

    if (*gen) {
        auto provider = dipmark::load_model_file(g_model);
        dipmark::GenerationConfig cfg;
        cfg.key = dipmark::SecretKey::from_hex(g_key);
        cfg.strategy = dipmark::ReweightStrategy::parse(g_strategy);
        cfg.params.window = g_window;
        cfg.params.alpha =
            cfg.strategy.kind == dipmark::ReweightKind::soft ? 0.45 : cfg.strategy.alpha;
        cfg.length = g_len;
        cfg.prompt = parse_prompt(g_prompt);
        std::ostringstream lines;
        for (std::uint32_t i = 0; i < g_num; ++i) {
            cfg.rng_seed = dipmark::derive_u64(g_seed, 0x67656e65ull, i);
            auto trace = dipmark::generate(*provider, cfg);
            json j;
            j["tokens"] = trace.tokens;
            if (g_trace) {
                json steps = json::array();
                for (const auto& s : trace.steps) {
                    json sj;
                    sj["texture_key"] = s.texture_key.tokens;
                    sj["repeated"] = s.repeated;
                    sj["cipher_digest"] =
                        dipmark::to_hex(s.cipher_digest.data(), s.cipher_digest.size());
                    sj["original_dist_hash"] = s.original_dist_hash;
                    sj["watermarked_dist_hash"] = s.watermarked_dist_hash;
                    steps.push_back(std::move(sj));
                }
                j["trace"] = std::move(steps);
            }
            lines << j.dump() << '\n';
        }
        emit(lines.str(), g_out);
        return 0;
    }

    if (*det) {
        if (d_vocab == 0 && !d_model.empty())
            d_vocab = dipmark::load_model_file(d_model)->vocab_size();
        if (d_vocab == 0)
            throw dipmark::ConfigError("detect needs --vocab-size or --model");
        dipmark::DetectorConfig cfg;
        cfg.key = dipmark::SecretKey::from_hex(d_key);
        cfg.gamma = d_gamma;
        cfg.window = d_window;
        cfg.vocab_size = d_vocab;
        cfg.target_fpr = d_fpr;
        cfg.mode = dipmark::threshold_mode_from_string(d_mode);
        cfg.fixed_z = d_z;
        auto sequences = dipmark::read_token_file(d_input, d_vocab);
        std::ostringstream lines;
        for (const auto& seq : sequences)
            lines << report_to_json(dipmark::detect(seq, cfg)).dump() << '\n';
        emit(lines.str(), d_out);
        return 0;
    }

    if (*cert) {
        if (!c_report.empty()) {
            std::ifstream in(c_report);
            if (!in) throw dipmark::ParseError("cannot open report file: " + c_report);
            std::string line;
            if (!std::getline(in, line))
                throw dipmark::ParseError("empty report file: " + c_report);
            json j = json::parse(line);
            c_phi = j.at("phi").get<double>();
            if (j.contains("threshold") && !phi_opt->count() && c_z == 0.0)
                c_z = j["threshold"].get<double>();
        } else if (!phi_opt->count()) {
            throw dipmark::ConfigError("certify needs --phi or --report");
        }
        dipmark::CertifiedRadius r =
            c_fixed_len ? dipmark::certified_radius_fixed_length(c_phi, c_z, c_window)
                        : dipmark::certified_radius(c_phi, c_z, c_gamma, c_window);
        json j;
        j["epsilon0"] = r.epsilon0;
        j["basis"] = r.basis == dipmark::CertifiedRadius::Basis::length_varying
                         ? "length_varying"
                         : "fixed_length";
        j["caveat"] = r.caveat;
        j["phi"] = r.phi;
        j["z"] = r.z;
        j["gamma"] = r.gamma;
        j["window"] = r.window;
        std::cout << j.dump() << '\n';
        return 0;
    }

    if (*att) {
        auto sequences = dipmark::read_token_file(a_input, a_vocab);
        std::ostringstream lines;
        for (std::size_t i = 0; i < sequences.size(); ++i) {
            dipmark::AttackSpec spec;
            spec.mode = dipmark::attack_mode_from_string(a_mode);
            spec.epsilon = a_eps;
            spec.rng_seed = dipmark::derive_u64(a_seed, 0x6174746bull, i);
            json j;
            j["tokens"] = dipmark::attack(sequences[i], spec, a_vocab);
            lines << j.dump() << '\n';
        }
        emit(lines.str(), a_out);
        return 0;
    }

    if (*ben) {
        std::string config_text = "{}";
        if (!b_config.empty()) {
            std::ifstream in(b_config);
            if (!in) throw dipmark::ParseError("cannot open config file: " + b_config);
            std::ostringstream ss;
            ss << in.rdbuf();
            config_text = ss.str();
        }
        auto cfg = dipmark::ExperimentConfig::from_json(config_text);
        cfg.experiment = b_experiment;
        auto tbl = dipmark::run_experiment(cfg, b_out);
        std::cout << tbl.to_csv();
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const dipmark::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dipmark::BadKey& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dipmark::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dipmark::OutOfVocab& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
