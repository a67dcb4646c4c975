#include "dipmark/lm.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dipmark/io.hpp"
#include "dipmark/numeric.hpp"

namespace dipmark {

namespace {

std::string ctx_bytes(std::span<const TokenId> ctx) {
    std::string s;
    s.resize(ctx.size() * 4);
    if (!ctx.empty()) std::memcpy(s.data(), ctx.data(), s.size());
    return s;
}

}  // namespace

Distribution next_distribution(const DistributionProvider& provider,
                               std::span<const TokenId> context) {
    try {
        Distribution d = provider.next(context);
        if (d.size() != provider.vocab_size())
            throw ProviderError("provider returned distribution of wrong size");
        return validate_distribution(std::move(d.probs));
    } catch (const ProviderError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProviderError(std::string("provider failed: ") + e.what());
    }
}

TableModel::TableModel(std::uint32_t vocab_size, std::vector<Distribution> steps)
    : vocab_size_(vocab_size), steps_(std::move(steps)) {
    if (steps_.empty()) throw ConfigError("table model needs at least one step");
    for (auto& d : steps_) {
        d = validate_distribution(std::move(d.probs));
        if (d.size() != vocab_size_)
            throw ConfigError("table model step size mismatch");
    }
}

TableModel TableModel::uniform(std::uint32_t vocab_size) {
    std::vector<double> u(vocab_size, 1.0 / vocab_size);
    return TableModel(vocab_size, {Distribution{std::move(u)}});
}

Distribution TableModel::next(std::span<const TokenId> context) const {
    return steps_[context.size() % steps_.size()];
}

NGramModel::NGramModel(std::uint32_t order, double lambda, std::uint32_t vocab_size)
    : order_(order), lambda_(lambda), vocab_size_(vocab_size) {
    if (order < 1) throw ConfigError("n-gram order must be >= 1");
    if (lambda < 0) throw ConfigError("n-gram lambda must be >= 0");
}

void NGramModel::add_count(std::span<const TokenId> context_tail, TokenId next,
                           std::uint32_t c) {
    std::vector<TokenId> key(context_tail.begin(), context_tail.end());
    counts_[key][next] += c;
    finalized_ = false;
}

void NGramModel::finalize() {
    index_.clear();
    totals_.clear();
    for (const auto& [ctx, by_token] : counts_) {
        std::string key = ctx_bytes(ctx);
        index_[key] = &by_token;
        std::uint64_t total = 0;
        for (const auto& [t, c] : by_token) total += c;
        totals_[key] = total;
    }
    finalized_ = true;
}

Distribution NGramModel::next(std::span<const TokenId> context) const {
    if (!finalized_ && !counts_.empty())
        throw ProviderError("n-gram model used before finalize()");
    const std::uint32_t tail_len = order_ - 1;
    std::span<const TokenId> tail =
        context.size() > tail_len ? context.subspan(context.size() - tail_len) : context;
    // Shorter-than-(order-1) contexts can only match at sequence start.
    std::string key = ctx_bytes(tail);
    auto it = index_.find(key);
    std::vector<double> p(vocab_size_, 0.0);
    if (it == index_.end()) {
        // Unseen context: all counts zero; additive smoothing gives uniform.
        std::fill(p.begin(), p.end(), 1.0 / vocab_size_);
        return Distribution{std::move(p)};
    }
    double denom = static_cast<double>(totals_.at(key)) + lambda_ * vocab_size_;
    if (denom <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / vocab_size_);
        return Distribution{std::move(p)};
    }
    for (double& v : p) v = lambda_ / denom;
    for (const auto& [t, c] : *it->second) p[t] += static_cast<double>(c) / denom;
    return Distribution{std::move(p)};
}

NGramModel ngram_train(const std::vector<std::vector<TokenId>>& corpus, std::uint32_t order,
                       double lambda, std::uint32_t vocab_size) {
    if (corpus.empty()) throw EmptyCorpus("n-gram training corpus is empty");
    bool any = false;
    std::uint32_t max_id = 0;
    for (const auto& seq : corpus)
        for (TokenId t : seq) {
            any = true;
            max_id = std::max(max_id, t);
        }
    if (!any) throw EmptyCorpus("n-gram training corpus has no tokens");
    if (vocab_size == 0) vocab_size = max_id + 1;
    if (max_id >= vocab_size) throw OutOfVocab("corpus token id exceeds vocab size");

    NGramModel model(order, lambda, vocab_size);
    const std::size_t ctx_len = order - 1;
    for (const auto& seq : corpus) {
        if (seq.size() < order) continue;
        for (std::size_t i = 0; i + order <= seq.size(); ++i) {
            std::span<const TokenId> ctx(seq.data() + i, ctx_len);
            model.add_count(ctx, seq[i + ctx_len]);
        }
    }
    model.finalize();
    return model;
}

Distribution top_k_truncate(const Distribution& dist, std::uint32_t k) {
    const std::uint32_t n = dist.size();
    if (k < 1 || k > n) throw ConfigError("top-k k must be in [1, N]");
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // Ties broken toward the lower token id for determinism.
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (dist[a] != dist[b]) return dist[a] > dist[b];
                          return a < b;
                      });
    std::vector<double> out(n, 0.0);
    NeumaierSum mass;
    for (std::uint32_t i = 0; i < k; ++i) {
        out[idx[i]] = dist[idx[i]];
        mass.add(dist[idx[i]]);
    }
    double total = mass.value();
    if (total <= 0.0) throw AllZeroTopK("top-k entries carry zero probability mass");
    for (double& v : out) v /= total;
    return validate_distribution(std::move(out));
}

TopKProvider::TopKProvider(std::shared_ptr<DistributionProvider> inner, std::uint32_t k)
    : inner_(std::move(inner)), k_(k) {
    if (!inner_) throw ConfigError("top-k adapter needs an inner provider");
    if (k_ < 1 || k_ > inner_->vocab_size())
        throw ConfigError("top-k k must be in [1, N]");
}

TokenizedCorpus tokenize_corpus_text(const std::string& text) {
    TokenizedCorpus out;
    std::unordered_map<std::string, TokenId> ids;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream words(line);
        std::string w;
        std::vector<TokenId> seq;
        while (words >> w) {
            auto [it, inserted] = ids.emplace(w, static_cast<TokenId>(ids.size()));
            seq.push_back(it->second);
            out.flat.push_back(it->second);
        }
        if (!seq.empty()) out.sequences.push_back(std::move(seq));
    }
    out.vocab.size = static_cast<std::uint32_t>(ids.size());
    out.vocab.labels.resize(ids.size());
    for (const auto& [w, id] : ids) out.vocab.labels[id] = w;
    return out;
}

TokenizedCorpus load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    TokenizedCorpus c = tokenize_corpus_text(ss.str());
    if (c.flat.empty()) throw EmptyCorpus("corpus file has no tokens: " + path);
    return c;
}

std::string model_to_json(const DistributionProvider& provider) {
    nlohmann::json j;
    if (auto* ng = dynamic_cast<const NGramModel*>(&provider)) {
        j["type"] = "ngram";
        j["order"] = ng->order();
        j["lambda"] = ng->lambda();
        j["vocab_size"] = ng->vocab_size();
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [ctx, by_token] : ng->counts()) {
            std::string key;
            for (std::size_t i = 0; i < ctx.size(); ++i) {
                if (i) key += ' ';
                key += std::to_string(ctx[i]);
            }
            nlohmann::json row = nlohmann::json::object();
            for (const auto& [t, c] : by_token) row[std::to_string(t)] = c;
            counts[key] = std::move(row);
        }
        j["counts"] = std::move(counts);
    } else if (auto* tm = dynamic_cast<const TableModel*>(&provider)) {
        j["type"] = "table";
        j["vocab_size"] = tm->vocab_size();
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& d : tm->steps()) steps.push_back(d.probs);
        j["steps"] = std::move(steps);
    } else if (auto* tk = dynamic_cast<const TopKProvider*>(&provider)) {
        j["type"] = "top_k";
        j["k"] = tk->k();
        j["inner"] = nlohmann::json::parse(model_to_json(tk->inner()));
    } else {
        throw ConfigError("cannot serialize this provider type");
    }
    return j.dump();
}

std::unique_ptr<DistributionProvider> model_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::string type = j.at("type").get<std::string>();
    if (type == "ngram") {
        auto model = std::make_unique<NGramModel>(j.at("order").get<std::uint32_t>(),
                                                  j.at("lambda").get<double>(),
                                                  j.at("vocab_size").get<std::uint32_t>());
        for (const auto& [key, row] : j.at("counts").items()) {
            std::vector<TokenId> ctx;
            std::istringstream ss(key);
            std::uint32_t id;
            while (ss >> id) ctx.push_back(id);
            for (const auto& [tok, c] : row.items())
                model->add_count(ctx, static_cast<TokenId>(std::stoul(tok)),
                                 c.get<std::uint32_t>());
        }
        model->finalize();
        return model;
    }
    if (type == "table") {
        std::vector<Distribution> steps;
        for (const auto& row : j.at("steps"))
            steps.push_back(Distribution{row.get<std::vector<double>>()});
        return std::make_unique<TableModel>(j.at("vocab_size").get<std::uint32_t>(),
                                            std::move(steps));
    }
    if (type == "top_k") {
        std::shared_ptr<DistributionProvider> inner =
            model_from_json(j.at("inner").dump());
        return std::make_unique<TopKProvider>(std::move(inner),
                                              j.at("k").get<std::uint32_t>());
    }
    throw ParseError("unknown model type: " + type);
}

std::unique_ptr<DistributionProvider> load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void save_model_file(const DistributionProvider& provider, const std::string& path) {
    atomic_write_file(path, model_to_json(provider));
}

}  // namespace dipmark
