#include "mp2v/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "mp2v/error.hpp"
#include "mp2v/sampler.hpp"

namespace mp2v {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename Real>
double dot(std::span<const Real> a, std::span<const Real> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

template <typename Real>
void check_index(const BasicEmbeddingModel<Real>& model, TokenIndex index) {
    if (index < 0 || static_cast<std::size_t>(index) >= model.rows()) {
        throw Error("token index " + std::to_string(index) + " out of range [0, " + std::to_string(model.rows()) + ")");
    }
}

template <typename Real>
void check_pair(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                std::span<const TokenIndex> negatives) {
    check_index(model, input);
    check_index(model, output);
    for (TokenIndex n : negatives) check_index(model, n);
}

// Scores of the positive target and each negative, pre-update.
template <typename Real>
void target_scores(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                   std::span<const TokenIndex> negatives, std::vector<double>& scores) {
    const auto in = model.input(input);
    scores.resize(negatives.size() + 1);
    scores[0] = dot<Real>(in, model.output(output));
    for (std::size_t t = 0; t < negatives.size(); ++t) scores[t + 1] = dot<Real>(in, model.output(negatives[t]));
}

// dL/ds for target t: sigma(s) - 1 for the positive, sigma(s) for negatives.
inline double score_gradient(double s, bool positive) { return positive ? sigmoid(s) - 1.0 : sigmoid(s); }

inline double loss_from_scores(std::span<const double> scores) {
    double loss = softplus(-scores[0]);
    for (std::size_t t = 1; t < scores.size(); ++t) loss += softplus(scores[t]);
    return loss;
}

}  // namespace

KindSet HyperParams::active_kinds() const {
    KindSet active;
    for (PairKind k : kAllPairKinds)
        if (kinds.contains(k) && weight(k) > 0.0) active.insert(k);
    return active;
}

void HyperParams::validate() const {
    if (dim < 1) throw Error("dim must be >= 1");
    if (window < 1) throw Error("window must be >= 1");
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (negatives < 1) throw Error("negatives must be >= 1");
    if (!(learning_rate > 0.0)) throw Error("learning rate must be > 0");
    for (double l : lambda)
        if (!(l >= 0.0)) throw Error("lambda values must be >= 0");
    if (min_count < 1) throw Error("min_count must be >= 1");
    if (!(power >= 0.0)) throw Error("power must be >= 0");
    if (!(subsample >= 0.0)) throw Error("subsample threshold must be >= 0");
    if (threads < 1) throw Error("threads must be >= 1");
}

template <typename Real>
double pair_loss(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                 std::span<const TokenIndex> negatives) {
    check_pair(model, input, output, negatives);
    std::vector<double> scores;
    target_scores(model, input, output, negatives, scores);
    return loss_from_scores(scores);
}

template <typename Real>
PairGradient pair_gradient(const BasicEmbeddingModel<Real>& model, TokenIndex input, TokenIndex output,
                           std::span<const TokenIndex> negatives) {
    check_pair(model, input, output, negatives);
    std::vector<double> scores;
    target_scores(model, input, output, negatives, scores);

    const std::size_t dim = model.dim();
    const auto in = model.input(input);
    PairGradient grad;
    grad.input_row.assign(dim, 0.0);
    grad.targets.reserve(scores.size());
    grad.targets.push_back(output);
    grad.targets.insert(grad.targets.end(), negatives.begin(), negatives.end());
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const double g = score_gradient(scores[t], t == 0);
        const auto out = model.output(grad.targets[t]);
        std::vector<double> out_grad(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            grad.input_row[d] += g * static_cast<double>(out[d]);
            out_grad[d] = g * static_cast<double>(in[d]);
        }
        grad.output_rows.push_back(std::move(out_grad));
    }
    return grad;
}

template <typename Real>
double sgns_step(BasicEmbeddingModel<Real>& model, const TrainingPair& pair,
                 std::span<const TokenIndex> negatives, double learning_rate, double weight) {
    if (!(learning_rate > 0.0)) throw Error("learning rate must be > 0");
    check_pair(model, pair.input, pair.output, negatives);

    thread_local std::vector<double> scores;
    thread_local std::vector<double> input_grad;
    target_scores(model, pair.input, pair.output, negatives, scores);
    const double loss = loss_from_scores(scores);
    if (weight == 0.0) return loss;

    const std::size_t dim = model.dim();
    const double step = learning_rate * weight;
    auto in = model.input(pair.input);
    input_grad.assign(dim, 0.0);

    // Input gradient from the pre-update output rows.
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const double g = score_gradient(scores[t], t == 0);
        const auto out = model.output(t == 0 ? pair.output : negatives[t - 1]);
        for (std::size_t d = 0; d < dim; ++d) input_grad[d] += g * static_cast<double>(out[d]);
    }
    bool finite = std::isfinite(loss);
    // Output rows use the pre-update input row.
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const double coef = step * score_gradient(scores[t], t == 0);
        auto out = model.output(t == 0 ? pair.output : negatives[t - 1]);
        for (std::size_t d = 0; d < dim; ++d) {
            out[d] = static_cast<Real>(static_cast<double>(out[d]) - coef * static_cast<double>(in[d]));
            finite = finite && std::isfinite(out[d]);
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        in[d] = static_cast<Real>(static_cast<double>(in[d]) - step * input_grad[d]);
        finite = finite && std::isfinite(in[d]);
    }
    if (!finite) {
        throw NumericError("non-finite update on pair (" + std::to_string(pair.input) + " -> " +
                           std::to_string(pair.output) + ", " + std::string(to_string(pair.kind)) +
                           "); lower the learning rate");
    }
    return loss;
}

std::string TrainingLog::to_jsonl() const {
    std::string out;
    for (const auto& e : epochs) {
        nlohmann::ordered_json line;
        line["epoch"] = e.epoch;
        line["learning_rate"] = e.learning_rate;
        nlohmann::ordered_json pairs = nlohmann::ordered_json::object();
        nlohmann::ordered_json loss = nlohmann::ordered_json::object();
        for (PairKind k : kAllPairKinds) {
            const auto i = static_cast<std::size_t>(k);
            if (e.pairs[i] == 0) continue;
            pairs[std::string(to_string(k))] = e.pairs[i];
            loss[std::string(to_string(k))] = e.mean_loss[i];
        }
        line["pairs"] = std::move(pairs);
        line["mean_loss"] = std::move(loss);
        out += line.dump();
        out += '\n';
    }
    return out;
}

namespace {

struct WorkerStats {
    std::array<double, kPairKindCount> loss{};
    std::array<std::uint64_t, kPairKindCount> pairs{};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

EmbeddingModel train(const TrainingCorpus& corpus, const HyperParams& params, TrainingLog* log) {
    params.validate();
    const KindSet kinds = params.active_kinds();
    if (!kinds.contains(PairKind::kJI)) throw Error("training requires JI pairs to be enabled");

    std::uint64_t pairs_per_epoch = 0;
    for (const auto& seq : corpus.sequences) pairs_per_epoch += count_pairs(seq, corpus.metadata, params.window, kinds);
    if (pairs_per_epoch == 0) throw Error("corpus yields no training pairs");
    std::uint64_t ji_pairs = 0;
    for (const auto& seq : corpus.sequences)
        ji_pairs += count_pairs(seq, corpus.metadata, params.window, KindSet::prod2vec());
    if (ji_pairs == 0) throw Error("corpus yields no item-to-item pairs");

    const NegativeSampler sampler = build_negative_sampler(corpus.vocab, params.power);
    EmbeddingModel model = init_model<float>(corpus.vocab.size(), params.dim, params.seed);

    const double total_pairs = static_cast<double>(pairs_per_epoch) * params.epochs;
    const double base_lr = params.learning_rate;
    const double min_lr = base_lr * 1e-4;
    auto learning_rate = [&](std::uint64_t processed) {
        return std::max(min_lr, base_lr * (1.0 - static_cast<double>(processed) / total_pairs));
    };

    // Keep probability per item under subsampling: (sqrt(f / tN) + 1) * tN / f, capped at 1.
    std::vector<double> keep;
    if (params.subsample > 0.0) {
        double total = 0.0;
        for (std::size_t i = 0; i < corpus.vocab.item_count(); ++i)
            total += static_cast<double>(corpus.vocab.frequency(static_cast<TokenIndex>(i)));
        const double threshold = params.subsample * total;
        keep.resize(corpus.vocab.item_count());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const double f = static_cast<double>(corpus.vocab.frequency(static_cast<TokenIndex>(i)));
            keep[i] = f > 0.0 ? std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f) : 1.0;
        }
    }

    const unsigned threads = std::max(1u, std::min<unsigned>(params.threads,
                                                             static_cast<unsigned>(corpus.sequences.size())));
    std::atomic<std::uint64_t> processed{0};
    std::vector<std::size_t> order(corpus.sequences.size());

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(mix_seed(params.seed, static_cast<std::uint64_t>(epoch), 0xffff));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        std::vector<WorkerStats> stats(threads);
        auto work = [&](unsigned worker, std::size_t begin, std::size_t end) {
            Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(epoch), worker));
            std::vector<TrainingPair> pairs;
            std::vector<TokenIndex> negatives;
            std::vector<TokenIndex> kept;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            WorkerStats& local = stats[worker];
            std::uint64_t seen = processed.load(std::memory_order_relaxed);
            std::uint64_t unreported = 0;
            for (std::size_t s = begin; s < end; ++s) {
                pairs.clear();
                const auto& seq = corpus.sequences[order[s]];
                std::uint64_t skipped = 0;
                if (keep.empty()) {
                    generate_pairs(seq, corpus.metadata, params.window, kinds, pairs);
                } else {
                    kept.clear();
                    for (TokenIndex t : seq)
                        if (unit(rng) < keep[static_cast<std::size_t>(t)]) kept.push_back(t);
                    generate_pairs(kept, corpus.metadata, params.window, kinds, pairs);
                    // Dropped positions still advance the learning-rate schedule.
                    skipped = count_pairs(seq, corpus.metadata, params.window, kinds) - pairs.size();
                }
                for (const TrainingPair& pair : pairs) {
                    negatives.clear();
                    sampler.sample(params.negatives, pair.output, rng, negatives);
                    const double lr = learning_rate(seen);
                    const double loss = sgns_step(model, pair, negatives, lr, params.weight(pair.kind));
                    const auto k = static_cast<std::size_t>(pair.kind);
                    local.loss[k] += loss;
                    ++local.pairs[k];
                    ++seen;
                    if (threads > 1 && ++unreported >= 1024) {
                        seen = processed.fetch_add(unreported, std::memory_order_relaxed) + unreported;
                        unreported = 0;
                    }
                }
                seen += skipped;
                unreported += skipped;
            }
            if (threads > 1) {
                processed.fetch_add(unreported, std::memory_order_relaxed);
            } else {
                processed.store(seen, std::memory_order_relaxed);
            }
        };

        if (threads == 1) {
            work(0, 0, order.size());
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (order.size() + threads - 1) / threads;
            for (unsigned t = 0; t < threads; ++t) {
                const std::size_t begin = std::min(order.size(), t * chunk);
                const std::size_t end = std::min(order.size(), begin + chunk);
                pool.emplace_back(work, t, begin, end);
            }
        }

        if (log) {
            EpochStats e;
            e.epoch = epoch + 1;
            e.learning_rate = learning_rate(processed.load());
            for (const auto& w : stats) {
                for (std::size_t k = 0; k < kPairKindCount; ++k) {
                    e.mean_loss[k] += w.loss[k];
                    e.pairs[k] += w.pairs[k];
                }
            }
            for (std::size_t k = 0; k < kPairKindCount; ++k)
                if (e.pairs[k]) e.mean_loss[k] /= static_cast<double>(e.pairs[k]);
            log->epochs.push_back(e);
        }
    }
    return model;
}

template double pair_loss<float>(const EmbeddingModel&, TokenIndex, TokenIndex, std::span<const TokenIndex>);
template double pair_loss<double>(const EmbeddingModelF64&, TokenIndex, TokenIndex, std::span<const TokenIndex>);
template PairGradient pair_gradient<float>(const EmbeddingModel&, TokenIndex, TokenIndex, std::span<const TokenIndex>);
template PairGradient pair_gradient<double>(const EmbeddingModelF64&, TokenIndex, TokenIndex,
                                            std::span<const TokenIndex>);
template double sgns_step<float>(EmbeddingModel&, const TrainingPair&, std::span<const TokenIndex>, double, double);
template double sgns_step<double>(EmbeddingModelF64&, const TrainingPair&, std::span<const TokenIndex>, double,
                                  double);

}  // namespace mp2v
