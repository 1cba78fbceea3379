#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mp2v/corpus.hpp"
#include "mp2v/embedding.hpp"
#include "mp2v/metrics.hpp"
#include "mp2v/scorers.hpp"
#include "mp2v/trainer.hpp"

namespace mp2v {

enum class Mode { kProd2Vec, kMetaProd2Vec };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Method names in presentation order.
inline constexpr std::array<std::string_view, 6> kMethodNames{
    "BestOf", "CoCounts", "Prod2Vec", "Meta-Prod2Vec", "Mix(Prod2Vec,CoCounts)", "Mix(Meta-Prod2Vec,CoCounts)"};

/// File stem used for a method's report (e.g. "mix_metaprod2vec_cocounts").
std::string method_file_stem(std::string_view method);

struct MetadataSource {
    std::string name;
    std::filesystem::path path;
};

struct EvalSettings {
    std::vector<std::size_t> k_list{10, 20};
    std::vector<double> alpha_grid;  // default: 0, 0.05, ..., 1
    std::size_t bootstrap_samples = 1000;
    double confidence = 0.90;
    std::vector<std::int64_t> bucket_edges{0, 1, 3};
    std::size_t pool_size = 500;
    int cocount_window = 0;  // 0: same as the training window
    CoCountSimilarity cocount_similarity = CoCountSimilarity::kRowCosine;
    // Which vectors represent an item when scoring by cosine.
    TableSelection embedding_table = TableSelection::kBoth;
    std::vector<std::string> methods{kMethodNames.begin(), kMethodNames.end()};

    EvalSettings();
    std::size_t max_k() const;
    void validate() const;
};

/// Everything a command needs; written next to its outputs as config.json.
struct RunConfig {
    std::filesystem::path sessions;
    std::vector<MetadataSource> metadata;
    std::filesystem::path out = "mp2v-run";
    Mode mode = Mode::kMetaProd2Vec;
    std::string phase = "both";  // tuning, final or both
    HyperParams params;
    EvalSettings eval;

    /// Mode-dependent defaults applied to the hyperparameters (enabled kinds).
    HyperParams effective_params() const;

    std::string to_json() const;
    static RunConfig from_json(std::string_view text);
    static RunConfig from_json_file(const std::filesystem::path& path);
};

std::vector<MetadataMap> load_metadata_sources(std::span<const MetadataSource> sources);

/// Embedding rows keyed by token, as trained or as loaded from a file.
struct EmbeddingTable {
    std::vector<std::string> tokens;
    EmbeddingModel model;
};

struct TrainedModel {
    TrainingCorpus corpus;
    EmbeddingModel model;
    TrainingLog log;

    EmbeddingTable table() const { return {corpus.vocab.tokens(), model}; }
};

/// Builds the vocabulary from the split's training sequences and trains.
/// Metadata tokens join the vocabulary only if some side-information kind is active.
TrainedModel train_embeddings(const SplitCorpus& split, std::span<const MetadataMap> metadata,
                              const HyperParams& params);

/// Items-only view of a split shared by all scorers of one phase.
struct EvalContext {
    Vocabulary items;
    std::vector<std::vector<TokenIndex>> sequences;
    CoCountMatrix cocounts;
    std::vector<EvalCase> cases;

    EvalContext(const SplitCorpus& split, std::int64_t min_count, int window);
};

/// Re-indexes `table` onto the context's item vocabulary; missing items get zero rows.
EmbeddingModel align_embeddings(const Vocabulary& items, const EmbeddingTable& table);

struct EmbeddingInputs {
    const EmbeddingTable* final_table = nullptr;
    const EmbeddingTable* tuning_table = nullptr;  // required for Mix methods
};

struct AlphaSelection {
    std::string method;
    double alpha = 0.0;
    std::vector<std::pair<double, double>> curve;  // (alpha, validation HR@K)
};

struct Comparison {
    std::vector<EvalReport> reports;  // presentation order
    std::vector<AlphaSelection> alphas;

    const EvalReport& report(std::string_view method) const;
    /// TSV: method, then `est (lo;hi)` per metric.
    std::string table_tsv() const;
};

/// Evaluates the requested methods on the final split; Mix alphas are tuned
/// on the tuning split. `embeddings` is keyed by "Prod2Vec" / "Meta-Prod2Vec".
Comparison run_comparison(std::span<const Session> sessions, const HyperParams& params, const EvalSettings& settings,
                          const std::map<std::string, EmbeddingInputs, std::less<>>& embeddings);

/// Alpha on `grid` maximizing validation HR@k (first maximum wins).
AlphaSelection select_alpha(const EvalContext& tuning, const Scorer& embedding, const Scorer& cocounts,
                            std::span<const double> grid, std::size_t k, std::size_t pool_size, unsigned threads,
                            std::string method);

// -- ablation ---------------------------------------------------------------

struct AblationConfig {
    std::string name;
    KindSet kinds;
};

/// only IM, only MI, only JM, without MM, full.
std::vector<AblationConfig> ablation_configs();

struct AblationRow {
    std::string name;
    double hit_ratio = 0.0;
    double ndcg = 0.0;
    std::optional<double> hit_ratio_lift;  // (config - BestOf) / (full - BestOf)
    std::optional<double> ndcg_lift;
};

struct AblationTable {
    std::size_t k = 20;
    double baseline_hit_ratio = 0.0;
    double baseline_ndcg = 0.0;
    std::vector<AblationRow> rows;

    std::string to_tsv() const;
};

/// Trains each configuration on the final split and reports its share of
/// the full model's lift over the BestOf baseline.
AblationTable ablation_run(const SplitCorpus& final_split, std::span<const MetadataMap> metadata,
                           const HyperParams& params, const EvalReport& baseline, std::size_t k,
                           unsigned eval_threads = 1, TableSelection vectors = TableSelection::kBoth);

/// (config - baseline) / (full - baseline); nullopt when full == baseline.
std::optional<double> lift_fraction(double config, double baseline, double full);

}  // namespace mp2v
