#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mp2v/corpus.hpp"
#include "mp2v/embedding.hpp"
#include "mp2v/pairgen.hpp"

namespace mp2v {

struct HyperParams {
    std::size_t dim = 50;
    int window = 3;
    int epochs = 10;
    std::size_t negatives = 5;
    double learning_rate = 0.025;
    /// Indexed by PairKind. The JI entry is ignored: sequence pairs always weigh 1.
    std::array<double, kPairKindCount> lambda{1.0, 1.0, 1.0, 1.0, 1.0};
    KindSet kinds = KindSet::all();
    std::int64_t min_count = 5;
    double power = 0.75;
    // Frequent-item subsampling threshold t (word2vec's -sample); 0 disables it.
    double subsample = 0.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    double weight(PairKind kind) const {
        return kind == PairKind::kJI ? 1.0 : lambda[static_cast<std::size_t>(kind)];
    }
    /// Kinds that are enabled and carry a positive weight.
    KindSet active_kinds() const;
    void validate() const;
};

/// -log s(w_in[input].w_out[output]) - sum_N log s(-w_in[input].w_out[N]).
template <typename Real>
double pair_loss(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                 std::span<const TokenIndex> negatives);

/// Gradient of pair_loss w.r.t. the touched rows. `output_rows[t]` belongs to
/// `targets[t]` where targets = {output, negatives...} (duplicates kept separate).
struct PairGradient {
    std::vector<double> input_row;
    std::vector<TokenIndex> targets;
    std::vector<std::vector<double>> output_rows;
};

template <typename Real>
PairGradient pair_gradient(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                           std::span<const TokenIndex> negatives);

/// One SGD step of size learning_rate * weight on pair_loss. All dot products
/// and gradients use the pre-step parameters. Returns the loss before the
/// update. Throws NumericError if the update is not finite.
template <typename Real>
double sgns_step(BasicEmbeddingModel<Real>& model, const TrainingPair& pair,
                 std::span<const TokenIndex> negatives, double learning_rate, double weight);

struct EpochStats {
    int epoch = 0;
    double learning_rate = 0.0;  // at the end of the epoch
    std::array<double, kPairKindCount> mean_loss{};
    std::array<std::uint64_t, kPairKindCount> pairs{};
};

struct TrainingLog {
    std::vector<EpochStats> epochs;
    /// One JSON object per line: {"epoch":..,"learning_rate":..,"pairs":{..},"mean_loss":{..}}.
    std::string to_jsonl() const;
};

/// Minimizes the weighted sum of per-kind negative-sampling losses with
/// linearly decaying SGD. Session order is shuffled per epoch from the seed.
/// threads == 1 is deterministic; threads > 1 updates the shared tables without
/// locks (Hogwild) and is not reproducible bit-for-bit.
EmbeddingModel train(const TrainingCorpus& corpus, const HyperParams& params, TrainingLog* log = nullptr);

}  // namespace mp2v
