#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "mp2v/error.hpp"

namespace mp2v::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<Phase> phases_of(const RunConfig& config) {
    if (config.phase == "both") return {Phase::kTuning, Phase::kFinal};
    return {parse_phase(config.phase)};
}

std::string_view method_mode_dir(std::string_view base) {
    return base == "Prod2Vec" ? to_string(Mode::kProd2Vec) : to_string(Mode::kMetaProd2Vec);
}

// One row per token: token, kind (item or meta), training frequency.
std::string vocab_tsv(const Vocabulary& vocab) {
    std::string out = "token\tkind\tfrequency\n";
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto idx = static_cast<TokenIndex>(i);
        out += vocab.token_of(idx);
        out += vocab.is_metadata(idx) ? "\tmeta\t" : "\titem\t";
        out += std::to_string(vocab.frequency(idx));
        out += '\n';
    }
    return out;
}

Vocabulary read_vocab_tsv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> tokens;
    std::vector<std::int64_t> freqs;
    std::vector<bool> meta;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue;
        std::istringstream fields(line);
        std::string token, kind, freq;
        if (!std::getline(fields, token, '\t') || !std::getline(fields, kind, '\t') || !std::getline(fields, freq)) {
            throw ParseError(path.string(), line_no, "expected token<TAB>kind<TAB>frequency");
        }
        if (kind != "item" && kind != "meta") throw ParseError(path.string(), line_no, "kind must be item or meta");
        tokens.push_back(token);
        meta.push_back(kind == "meta");
        try {
            freqs.push_back(std::stoll(freq));
        } catch (const std::exception&) {
            throw ParseError(path.string(), line_no, "bad frequency '" + freq + "'");
        }
    }
    return Vocabulary(std::move(tokens), std::move(freqs), std::move(meta));
}

EmbeddingTable read_table(const fs::path& path) {
    LoadedEmbeddings loaded = load_embeddings(path);
    return {std::move(loaded.tokens), std::move(loaded.model)};
}

void note(const std::string& message) { std::cerr << "mp2v: " << message << '\n'; }

}  // namespace

fs::path phase_dir(const RunConfig& config, Mode mode, Phase phase) {
    return config.out / std::string(to_string(mode)) / std::string(to_string(phase));
}

fs::path reports_dir(const RunConfig& config) { return config.out / "reports"; }
fs::path ablation_dir(const RunConfig& config) { return config.out / "ablation"; }

int cmd_train(const RunConfig& config) {
    const HyperParams params = config.effective_params();
    params.validate();
    const auto phases = phases_of(config);
    const bool side = params.active_kinds().has_side_information();
    if (side && config.metadata.empty()) {
        throw Error("mode metaprod2vec needs at least one --metadata NAME=PATH (or set every side lambda to 0)");
    }
    // Inputs are read and validated before any training starts.
    const std::vector<MetadataMap> metadata =
        side ? load_metadata_sources(config.metadata) : std::vector<MetadataMap>{};
    const std::vector<Session> sessions = load_sessions(config.sessions);

    for (Phase phase : phases) {
        const SplitCorpus split = split_sessions(sessions, phase);
        const TrainedModel trained = train_embeddings(split, metadata, params);
        const fs::path dir = phase_dir(config, config.mode, phase);
        fs::create_directories(dir);
        save_embeddings(trained.model, trained.corpus.vocab.tokens(), dir / "embeddings.txt", TableSelection::kBoth);
        write_text(dir / "vocab.tsv", vocab_tsv(trained.corpus.vocab));
        write_text(dir / "train_log.jsonl", trained.log.to_jsonl());
        write_text(dir / "config.json", config.to_json());
        note("trained " + std::string(to_string(config.mode)) + "/" + std::string(to_string(phase)) + ": " +
             std::to_string(trained.corpus.vocab.item_count()) + " items, " +
             std::to_string(trained.corpus.vocab.size() - trained.corpus.vocab.item_count()) + " metadata tokens, " +
             std::to_string(split.excluded) + " short sessions skipped -> " + dir.string());
    }
    return 0;
}

int cmd_eval(const RunConfig& config) {
    config.eval.validate();
    const HyperParams params = config.effective_params();

    // Work out which embedding files the requested methods need and report all missing ones at once.
    struct Needed {
        std::string base;
        Phase phase;
        fs::path path;
    };
    std::vector<Needed> needed;
    auto wants = [&](std::string_view m) {
        return std::find(config.eval.methods.begin(), config.eval.methods.end(), m) != config.eval.methods.end();
    };
    for (std::string_view base : {"Prod2Vec", "Meta-Prod2Vec"}) {
        const Mode mode = parse_mode(method_mode_dir(base));
        const bool mix = wants("Mix(" + std::string(base) + ",CoCounts)");
        if (wants(base) || mix) needed.push_back({std::string(base), Phase::kFinal, phase_dir(config, mode, Phase::kFinal)});
        if (mix) needed.push_back({std::string(base), Phase::kTuning, phase_dir(config, mode, Phase::kTuning)});
    }
    std::string missing;
    for (const auto& n : needed) {
        if (!fs::exists(n.path / "embeddings.txt")) {
            missing += "\n  " + (n.path / "embeddings.txt").string() + "  (mp2v train --mode " +
                       std::string(method_mode_dir(n.base)) + " --phase " + std::string(to_string(n.phase)) + ")";
        }
    }
    if (!missing.empty()) throw Error("missing trained embeddings; train these first:" + missing);

    std::map<std::string, EmbeddingTable> tables;
    std::map<std::string, EmbeddingInputs, std::less<>> inputs;
    for (const auto& n : needed) {
        const std::string key = n.base + "/" + std::string(to_string(n.phase));
        tables.emplace(key, read_table(n.path / "embeddings.txt"));
    }
    for (const auto& n : needed) {
        const EmbeddingTable* t = &tables.at(n.base + "/" + std::string(to_string(n.phase)));
        auto& in = inputs[n.base];
        (n.phase == Phase::kFinal ? in.final_table : in.tuning_table) = t;
    }

    const std::vector<Session> sessions = load_sessions(config.sessions);
    const Comparison cmp = run_comparison(sessions, params, config.eval, inputs);

    const fs::path dir = reports_dir(config);
    for (const auto& r : cmp.reports) write_text(dir / (method_file_stem(r.method) + ".json"), r.to_json());
    write_text(dir / "comparison.tsv", cmp.table_tsv());
    if (!cmp.alphas.empty()) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& a : cmp.alphas) {
            nlohmann::ordered_json curve = nlohmann::ordered_json::array();
            for (const auto& [alpha, hr] : a.curve) curve.push_back({alpha, hr});
            j.push_back({{"method", a.method}, {"alpha", a.alpha}, {"validation_curve", curve}});
        }
        write_text(dir / "alpha.json", j.dump(2) + "\n");
    }
    write_text(dir / "config.json", config.to_json());
    std::cout << cmp.table_tsv();
    return 0;
}

int cmd_ablate(const RunConfig& config) {
    config.eval.validate();
    HyperParams params = config.effective_params();
    params.validate();
    if (config.metadata.empty()) throw Error("ablation needs at least one --metadata NAME=PATH");
    const std::vector<MetadataMap> metadata = load_metadata_sources(config.metadata);
    const std::vector<Session> sessions = load_sessions(config.sessions);
    const SplitCorpus split = split_sessions(sessions, Phase::kFinal);

    const std::size_t k = config.eval.max_k();
    const EvalContext ctx(split, params.min_count, params.window);
    EvalOptions options;
    options.k_list = {k};
    options.bootstrap_samples = 0;
    options.threads = params.threads;
    const EvalReport baseline = evaluate(BestOfScorer(ctx.items), ctx.cases, options);

    const AblationTable table =
        ablation_run(split, metadata, params, baseline, k, params.threads, config.eval.embedding_table);
    const fs::path dir = ablation_dir(config);
    write_text(dir / "ablation.tsv", table.to_tsv());
    write_text(dir / "config.json", config.to_json());
    std::cout << table.to_tsv();
    return 0;
}

int cmd_nn(const NnRequest& request) {
    const LoadedEmbeddings loaded = load_embeddings(request.embeddings);
    const TableSelection table =
        request.table.value_or(loaded.has_output ? TableSelection::kBoth : TableSelection::kInput);
    if (table != TableSelection::kInput && !loaded.has_output) {
        throw Error(request.embeddings.string() + " carries input vectors only; use --table input");
    }

    const fs::path vocab_path = request.vocab.value_or(request.embeddings.parent_path() / "vocab.tsv");
    Vocabulary vocab;
    if (fs::exists(vocab_path)) {
        vocab = read_vocab_tsv(vocab_path);
        if (vocab.tokens() != loaded.tokens) {
            throw Error(vocab_path.string() + " does not match the tokens of " + request.embeddings.string());
        }
    } else if (request.vocab) {
        throw Error("cannot open " + vocab_path.string());
    } else {
        note("no vocab.tsv next to the embeddings; every token is treated as an item");
        vocab = Vocabulary(loaded.tokens, std::vector<std::int64_t>(loaded.tokens.size(), 1),
                           std::vector<bool>(loaded.tokens.size(), false));
    }

    const EmbeddingScorer scorer(vocab, loaded.model, "Embedding", table);
    const auto top = scorer.top_k(std::string_view(request.query), request.k);
    std::cout << "query\trank\titem\tscore\n";
    char score[32];
    for (std::size_t r = 0; r < top.size(); ++r) {
        std::snprintf(score, sizeof(score), "%.6f", top[r].score);
        std::cout << request.query << '\t' << r + 1 << '\t' << vocab.token_of(top[r].item) << '\t' << score << '\n';
    }
    return 0;
}

}  // namespace mp2v::cli
