#include "mp2v/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "mp2v/error.hpp"

namespace mp2v {

using nlohmann::ordered_json;

std::string_view to_string(Mode mode) {
    return mode == Mode::kProd2Vec ? "prod2vec" : "metaprod2vec";
}

Mode parse_mode(std::string_view text) {
    if (text == "prod2vec") return Mode::kProd2Vec;
    if (text == "metaprod2vec") return Mode::kMetaProd2Vec;
    throw Error("unknown mode '" + std::string(text) + "' (expected prod2vec or metaprod2vec)");
}

std::string method_file_stem(std::string_view method) {
    std::string out;
    for (char c : method) {
        if (c == '(' || c == ',') {
            out.push_back('_');
        } else if (c == ')' || c == '-') {
            continue;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

EvalSettings::EvalSettings() {
    for (int i = 0; i <= 20; ++i) alpha_grid.push_back(i * 0.05);
}

std::size_t EvalSettings::max_k() const {
    return k_list.empty() ? 0 : *std::max_element(k_list.begin(), k_list.end());
}

void EvalSettings::validate() const {
    if (k_list.empty()) throw Error("K list must not be empty");
    for (std::size_t k : k_list)
        if (k < 1) throw Error("K must be >= 1");
    if (alpha_grid.empty()) throw Error("alpha grid must not be empty");
    for (double a : alpha_grid)
        if (!(a >= 0.0 && a <= 1.0)) throw Error("alpha grid values must lie in [0, 1]");
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence must lie in (0, 1)");
    BucketSpec{bucket_edges}.validate();
    if (pool_size < 1) throw Error("candidate pool must be >= 1");
    if (cocount_window < 0) throw Error("co-count window must be >= 0");
    for (const auto& m : methods) {
        if (std::find(kMethodNames.begin(), kMethodNames.end(), m) == kMethodNames.end()) {
            throw Error("unknown method '" + m + "'");
        }
    }
}

HyperParams RunConfig::effective_params() const {
    HyperParams p = params;
    if (mode == Mode::kProd2Vec) p.kinds = KindSet::prod2vec();
    return p;
}

std::string RunConfig::to_json() const {
    ordered_json j;
    j["sessions"] = sessions.string();
    ordered_json meta = ordered_json::array();
    for (const auto& m : metadata) meta.push_back({{"name", m.name}, {"path", m.path.string()}});
    j["metadata"] = std::move(meta);
    j["out"] = out.string();
    j["mode"] = std::string(to_string(mode));
    j["phase"] = phase;

    const HyperParams& p = params;
    ordered_json hp;
    hp["dim"] = p.dim;
    hp["window"] = p.window;
    hp["epochs"] = p.epochs;
    hp["negatives"] = p.negatives;
    hp["learning_rate"] = p.learning_rate;
    ordered_json lambda = ordered_json::object();
    for (PairKind k : kAllPairKinds)
        if (k != PairKind::kJI) lambda[std::string(to_string(k))] = p.lambda[static_cast<std::size_t>(k)];
    hp["lambda"] = std::move(lambda);
    ordered_json kinds = ordered_json::array();
    for (PairKind k : kAllPairKinds)
        if (p.kinds.contains(k)) kinds.push_back(std::string(to_string(k)));
    hp["kinds"] = std::move(kinds);
    hp["min_count"] = p.min_count;
    hp["power"] = p.power;
    hp["subsample"] = p.subsample;
    hp["seed"] = p.seed;
    hp["threads"] = p.threads;
    j["params"] = std::move(hp);

    ordered_json ev;
    ev["k_list"] = eval.k_list;
    ev["alpha_grid"] = eval.alpha_grid;
    ev["bootstrap_samples"] = eval.bootstrap_samples;
    ev["confidence"] = eval.confidence;
    ev["bucket_edges"] = eval.bucket_edges;
    ev["pool_size"] = eval.pool_size;
    ev["cocount_window"] = eval.cocount_window;
    ev["cocount_similarity"] =
        eval.cocount_similarity == CoCountSimilarity::kRowCosine ? "row-cosine" : "normalized-count";
    ev["embedding_table"] = to_string(eval.embedding_table);
    ev["methods"] = eval.methods;
    j["eval"] = std::move(ev);
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(std::string_view text) {
    RunConfig c;
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid config JSON: ") + e.what());
    }
    try {
        if (j.contains("sessions")) c.sessions = j["sessions"].get<std::string>();
        if (j.contains("metadata")) {
            for (const auto& m : j["metadata"]) {
                c.metadata.push_back({m.at("name").get<std::string>(), m.at("path").get<std::string>()});
            }
        }
        if (j.contains("out")) c.out = j["out"].get<std::string>();
        if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
        if (j.contains("phase")) c.phase = j["phase"].get<std::string>();
        if (j.contains("params")) {
            const auto& hp = j["params"];
            HyperParams& p = c.params;
            p.dim = hp.value("dim", p.dim);
            p.window = hp.value("window", p.window);
            p.epochs = hp.value("epochs", p.epochs);
            p.negatives = hp.value("negatives", p.negatives);
            p.learning_rate = hp.value("learning_rate", p.learning_rate);
            if (hp.contains("lambda")) {
                for (const auto& [key, value] : hp["lambda"].items()) {
                    const auto kind = parse_pair_kind(key);
                    if (!kind || *kind == PairKind::kJI) throw Error("invalid lambda key '" + key + "'");
                    p.lambda[static_cast<std::size_t>(*kind)] = value.get<double>();
                }
            }
            if (hp.contains("kinds")) {
                p.kinds = KindSet{};
                for (const auto& k : hp["kinds"]) {
                    const auto kind = parse_pair_kind(k.get<std::string>());
                    if (!kind) throw Error("invalid pair kind '" + k.get<std::string>() + "'");
                    p.kinds.insert(*kind);
                }
            }
            p.min_count = hp.value("min_count", p.min_count);
            p.power = hp.value("power", p.power);
            p.subsample = hp.value("subsample", p.subsample);
            p.seed = hp.value("seed", p.seed);
            p.threads = hp.value("threads", p.threads);
        }
        if (j.contains("eval")) {
            const auto& ev = j["eval"];
            EvalSettings& e = c.eval;
            e.k_list = ev.value("k_list", e.k_list);
            e.alpha_grid = ev.value("alpha_grid", e.alpha_grid);
            e.bootstrap_samples = ev.value("bootstrap_samples", e.bootstrap_samples);
            e.confidence = ev.value("confidence", e.confidence);
            e.bucket_edges = ev.value("bucket_edges", e.bucket_edges);
            e.pool_size = ev.value("pool_size", e.pool_size);
            e.cocount_window = ev.value("cocount_window", e.cocount_window);
            if (ev.contains("cocount_similarity")) {
                const auto s = ev["cocount_similarity"].get<std::string>();
                if (s == "row-cosine") {
                    e.cocount_similarity = CoCountSimilarity::kRowCosine;
                } else if (s == "normalized-count") {
                    e.cocount_similarity = CoCountSimilarity::kNormalizedCount;
                } else {
                    throw Error("unknown cocount_similarity '" + s + "'");
                }
            }
            if (ev.contains("embedding_table")) {
                e.embedding_table = parse_table_selection(ev["embedding_table"].get<std::string>());
            }
            e.methods = ev.value("methods", e.methods);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::vector<MetadataMap> load_metadata_sources(std::span<const MetadataSource> sources) {
    std::vector<MetadataMap> maps;
    for (const auto& s : sources) {
        for (const auto& m : maps)
            if (m.name() == s.name) throw Error("metadata attribute '" + s.name + "' given twice");
        maps.push_back(load_metadata(s.path, s.name));
    }
    return maps;
}

TrainedModel train_embeddings(const SplitCorpus& split, std::span<const MetadataMap> metadata,
                              const HyperParams& params) {
    params.validate();
    const bool side = params.active_kinds().has_side_information();
    if (side && metadata.empty()) throw Error("side-information pair kinds are enabled but no metadata was given");
    TrainedModel trained;
    trained.corpus = encode_corpus(split.train, metadata, params.min_count, side);
    trained.model = train(trained.corpus, params, &trained.log);
    return trained;
}

EvalContext::EvalContext(const SplitCorpus& split, std::int64_t min_count, int window)
    : items(build_vocabulary(split.train, {}, min_count, false)),
      sequences(encode_sequences(split.train, items)),
      cocounts(items.size(), sequences, window),
      cases(make_eval_cases(split, items)) {}

EmbeddingModel align_embeddings(const Vocabulary& items, const EmbeddingTable& table) {
    if (table.tokens.size() != table.model.rows()) throw Error("embedding table: token/row count mismatch");
    const std::size_t dim = table.model.dim();
    EmbeddingModel aligned(items.size(), dim);
    std::unordered_map<std::string_view, std::size_t> rows;
    rows.reserve(table.tokens.size());
    for (std::size_t r = 0; r < table.tokens.size(); ++r) rows.emplace(table.tokens[r], r);
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto it = rows.find(items.token_of(static_cast<TokenIndex>(i)));
        if (it == rows.end()) continue;
        const auto src = static_cast<TokenIndex>(it->second);
        const auto dst = static_cast<TokenIndex>(i);
        std::copy_n(table.model.input(src).begin(), dim, aligned.input(dst).begin());
        std::copy_n(table.model.output(src).begin(), dim, aligned.output(dst).begin());
    }
    return aligned;
}

const EvalReport& Comparison::report(std::string_view method) const {
    for (const auto& r : reports)
        if (r.method == method) return r;
    throw Error("no report for method " + std::string(method));
}

std::string Comparison::table_tsv() const {
    std::ostringstream out;
    out << "method";
    if (!reports.empty())
        for (const auto& m : reports.front().metrics) out << '\t' << m.name;
    out << '\n';
    char buffer[128];
    for (const auto& r : reports) {
        out << r.method;
        for (const auto& m : r.metrics) {
            std::snprintf(buffer, sizeof(buffer), "\t%.4f (%.4f;%.4f)", m.estimate, m.low, m.high);
            out << buffer;
        }
        out << '\n';
    }
    return out.str();
}

AlphaSelection select_alpha(const EvalContext& tuning, const Scorer& embedding, const Scorer& cocounts,
                            std::span<const double> grid, std::size_t k, std::size_t pool_size, unsigned threads,
                            std::string method) {
    if (grid.empty()) throw Error("alpha grid must not be empty");
    for (double alpha : grid)
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha grid values must lie in [0, 1]");

    std::vector<const EvalCase*> active;
    for (const auto& c : tuning.cases)
        if (c.query != kNoToken) active.push_back(&c);
    if (active.empty()) throw Error("no evaluable users on the tuning split");

    // Pools and component scores do not depend on alpha, so each user is
    // scored once and its hit is resolved for every grid value. The blend is
    // the same expression MixScorer uses.
    threads = std::max(1u, threads);
    std::vector<std::vector<std::size_t>> hits(threads, std::vector<std::size_t>(grid.size(), 0));
    auto work = [&](unsigned worker) {
        std::vector<TokenIndex> pool;
        std::vector<double> sa, sb;
        for (std::size_t u = worker; u < active.size(); u += threads) {
            const EvalCase& c = *active[u];
            pool.clear();
            for (const auto& s : embedding.top_k(c.query, pool_size)) pool.push_back(s.item);
            for (const auto& s : cocounts.top_k(c.query, pool_size)) pool.push_back(s.item);
            std::sort(pool.begin(), pool.end());
            pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
            auto at = std::lower_bound(pool.begin(), pool.end(), c.target);
            if (c.target == kNoToken || at == pool.end() || *at != c.target) continue;
            const std::size_t t = static_cast<std::size_t>(at - pool.begin());
            sa.resize(pool.size());
            sb.resize(pool.size());
            embedding.score_many(c.query, pool, sa);
            cocounts.score_many(c.query, pool, sb);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double alpha = grid[g];
                const double target_score = alpha * sa[t] + (1.0 - alpha) * sb[t];
                std::size_t ahead = 0;
                for (std::size_t i = 0; i < pool.size() && ahead < k; ++i) {
                    const double v = alpha * sa[i] + (1.0 - alpha) * sb[i];
                    if (v > target_score || (v == target_score && pool[i] < c.target)) ++ahead;
                }
                if (ahead < k) ++hits[worker][g];
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }

    AlphaSelection selection;
    selection.method = std::move(method);
    double best = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t count = 0;
        for (const auto& h : hits) count += h[g];
        const double hr = static_cast<double>(count) / static_cast<double>(k) / static_cast<double>(active.size());
        selection.curve.emplace_back(grid[g], hr);
        if (hr > best) {
            best = hr;
            selection.alpha = grid[g];
        }
    }
    return selection;
}

namespace {

bool wants(const EvalSettings& settings, std::string_view method) {
    return std::find(settings.methods.begin(), settings.methods.end(), method) != settings.methods.end();
}

}  // namespace

Comparison run_comparison(std::span<const Session> sessions, const HyperParams& params, const EvalSettings& settings,
                          const std::map<std::string, EmbeddingInputs, std::less<>>& embeddings) {
    settings.validate();
    const int window = settings.cocount_window > 0 ? settings.cocount_window : params.window;
    const std::size_t max_k = settings.max_k();

    auto require = [&](std::string_view base, bool tuning) -> const EmbeddingTable& {
        auto it = embeddings.find(base);
        const EmbeddingTable* t = nullptr;
        if (it != embeddings.end()) t = tuning ? it->second.tuning_table : it->second.final_table;
        if (!t) {
            throw Error("missing " + std::string(tuning ? "tuning" : "final") + "-phase " + std::string(base) +
                        " embeddings; train them first");
        }
        return *t;
    };

    bool need_tuning = false;
    for (std::string_view base : {"Prod2Vec", "Meta-Prod2Vec"}) {
        const std::string mix = "Mix(" + std::string(base) + ",CoCounts)";
        if (wants(settings, base)) require(base, false);
        if (wants(settings, mix)) {
            require(base, false);
            require(base, true);
            need_tuning = true;
        }
    }

    const SplitCorpus final_split = split_sessions(sessions, Phase::kFinal);
    const EvalContext final_ctx(final_split, params.min_count, window);
    std::optional<SplitCorpus> tuning_split;
    std::optional<EvalContext> tuning_ctx;
    if (need_tuning) {
        tuning_split = split_sessions(sessions, Phase::kTuning);
        tuning_ctx.emplace(*tuning_split, params.min_count, window);
    }

    EvalOptions options;
    options.k_list = settings.k_list;
    options.bootstrap_samples = settings.bootstrap_samples;
    options.confidence = settings.confidence;
    options.seed = params.seed;
    options.threads = params.threads;
    options.pair_counts = &final_ctx.cocounts;
    options.buckets = BucketSpec{settings.bucket_edges};
    options.bucket_k = max_k;

    Comparison result;
    const BestOfScorer best_of(final_ctx.items);
    const CoCountsScorer cocounts(final_ctx.items, final_ctx.cocounts, settings.cocount_similarity);

    std::map<std::string, EmbeddingModel> final_models;
    for (std::string_view base : {"Prod2Vec", "Meta-Prod2Vec"}) {
        if (embeddings.contains(base) && embeddings.find(base)->second.final_table) {
            final_models.emplace(base, align_embeddings(final_ctx.items, require(base, false)));
        }
    }

    for (std::string_view method : kMethodNames) {
        if (!wants(settings, method)) continue;
        if (method == "BestOf") {
            result.reports.push_back(evaluate(best_of, final_ctx.cases, options));
        } else if (method == "CoCounts") {
            result.reports.push_back(evaluate(cocounts, final_ctx.cases, options));
        } else if (method == "Prod2Vec" || method == "Meta-Prod2Vec") {
            const EmbeddingScorer scorer(final_ctx.items, final_models.at(std::string(method)), std::string(method),
                                         settings.embedding_table);
            result.reports.push_back(evaluate(scorer, final_ctx.cases, options));
        } else {
            const std::string base = method == "Mix(Prod2Vec,CoCounts)" ? "Prod2Vec" : "Meta-Prod2Vec";
            const EmbeddingModel tuning_model = align_embeddings(tuning_ctx->items, require(base, true));
            const EmbeddingScorer tuning_scorer(tuning_ctx->items, tuning_model, base, settings.embedding_table);
            const CoCountsScorer tuning_cocounts(tuning_ctx->items, tuning_ctx->cocounts, settings.cocount_similarity);
            AlphaSelection selection = select_alpha(*tuning_ctx, tuning_scorer, tuning_cocounts, settings.alpha_grid,
                                                    max_k, settings.pool_size, params.threads, std::string(method));
            const EmbeddingScorer scorer(final_ctx.items, final_models.at(base), base, settings.embedding_table);
            const MixScorer mix(selection.alpha, scorer, cocounts, settings.pool_size, std::string(method));
            result.reports.push_back(evaluate(mix, final_ctx.cases, options));
            result.alphas.push_back(std::move(selection));
        }
    }
    return result;
}

}  // namespace mp2v
