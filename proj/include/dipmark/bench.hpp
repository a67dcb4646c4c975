#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dipmark/core.hpp"
#include "dipmark/detector.hpp"
#include "dipmark/lm.hpp"
#include "dipmark/reweight.hpp"

namespace dipmark {

// One result row; fields are filled as applicable per experiment.
struct MetricRow {
    std::string label;
    std::optional<double> fpr, tnr, tpr, fnr, auc;
    std::optional<double> mean_phi, mean_green_ratio;
    std::optional<double> wall_time_s;
    std::optional<double> max_abs_error, tv_distance;
    std::optional<double> epsilon, gamma, nominal;
};

struct MetricTable {
    std::vector<MetricRow> rows;

    std::string to_csv() const;
    std::string to_json() const;
};

// Experiment harness configuration, parsed from a JSON object. Fields not
// used by an experiment are ignored. See README for the schema.
struct ExperimentConfig {
    std::string experiment;
    std::uint32_t trials = 500;
    std::uint64_t rng_seed = 1;
    std::string provider_json;  // raw provider spec
    std::string corpus_path;    // for corpus-window nulls
    std::vector<std::string> strategies = {"dip:alpha=0.45"};
    double gamma = 0.5;
    std::uint32_t window = 1;
    std::uint32_t length_min = 255;
    std::uint32_t length_max = 265;
    std::string null_source = "corpus";  // calibrate: "corpus" | "provider"
    std::vector<double> eps_grid = {0.0, 0.1, 0.2, 0.3};
    std::vector<double> gamma_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double alpha = 0.45;
    std::uint32_t vocab_n = 4;
    std::uint64_t samples = 100000;

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
};

// Builds a provider from a spec object:
//   {"type":"ngram_corpus","path":...,"order":3,"lambda":0.1}
//   {"type":"file","path":...}
//   {"type":"uniform","vocab_size":N}
//   {"type":"table","vocab_size":N,"steps":[[...],...]}
std::unique_ptr<DistributionProvider> build_provider(const std::string& spec_json);

// Averages dip_reweight over all N! permutations of the support of `dist`
// and returns the max entrywise |average - dist|. N must stay enumerable.
double preserve_exact(double alpha, const Distribution& dist);

// Same check by Monte Carlo over cipher-derived permutations with random
// texture keys; returns the total-variation distance.
double preserve_mc(double alpha, std::uint32_t n, const Distribution& dist,
                   std::uint64_t samples, std::uint64_t rng_seed);

// Empirical FPR of the KL statistic and the z-test on unwatermarked
// sequences, at nominal 0.1 and 0.01. Null sequences are corpus windows
// (real text; the realistic case) or provider samples, one fresh key per
// trial.
MetricTable calibrate(const ExperimentConfig& cfg);

// Watermarked vs unwatermarked error rates per strategy at the standard
// operating thresholds 1.073/sqrt(m) and 1.517/sqrt(m), plus the mean green
// ratio.
MetricTable detectability(const ExperimentConfig& cfg);

// ROC AUC of phi on watermarked-and-attacked vs unwatermarked sequences per
// attack strength; attacks nest their edit positions across the grid.
MetricTable resilience(const ExperimentConfig& cfg);

// Mean phi of a watermarked corpus re-detected at each gamma in the grid.
MetricTable gamma_sweep(const ExperimentConfig& cfg);

// Wall time of single-threaded batch detection.
MetricTable timing(const ExperimentConfig& cfg);

// Dispatch + write metrics.csv / metrics.json / manifest.json into out_dir.
MetricTable run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// ROC AUC with 0.5 tie credit (rank-sum form, trapezoid equivalent).
double roc_auc(std::vector<double> positives, std::vector<double> negatives);

// Deterministic stream splitting: one u64 from (master, salt, index).
std::uint64_t derive_u64(std::uint64_t master, std::uint64_t salt, std::uint64_t index);
// 32-byte secret key for a trial.
SecretKey derive_key(std::uint64_t master, std::uint64_t salt, std::uint64_t index);

}  // namespace dipmark
