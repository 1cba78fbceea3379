#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mp2v/pairgen.hpp"
#include "mp2v/sampler.hpp"
#include "mp2v/scorers.hpp"
#include "mp2v/trainer.hpp"

namespace {

using namespace mp2v;

void BM_SgnsStep(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const std::size_t rows = 10000;
    auto model = init_model<float>(rows, dim, 1);
    Rng rng(2);
    std::uniform_int_distribution<TokenIndex> pick(0, static_cast<TokenIndex>(rows - 1));
    std::vector<TokenIndex> negatives(5);
    for (auto _ : state) {
        const TrainingPair pair{pick(rng), pick(rng), PairKind::kJI};
        for (auto& n : negatives) n = pick(rng);
        benchmark::DoNotOptimize(sgns_step(model, pair, negatives, 0.025, 1.0));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SgnsStep)->Arg(32)->Arg(50)->Arg(128);

void BM_GeneratePairs(benchmark::State& state) {
    const auto length = static_cast<std::size_t>(state.range(0));
    const TokenIndex items = 1000;
    MetadataIndex meta(static_cast<std::size_t>(items), 1);
    for (TokenIndex i = 0; i < items; ++i) meta.set(i, 0, items + i % 50);
    Rng rng(3);
    std::vector<TokenIndex> seq(length);
    for (auto& t : seq) t = static_cast<TokenIndex>(rng() % static_cast<std::uint64_t>(items));
    std::vector<TrainingPair> out;
    for (auto _ : state) {
        out.clear();
        generate_pairs(seq, meta, 3, KindSet::all(), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}
BENCHMARK(BM_GeneratePairs)->Arg(10)->Arg(100);

void BM_EmbeddingTopK(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("i" + std::to_string(i));
    const Vocabulary vocab(tokens, std::vector<std::int64_t>(n, 1), std::vector<bool>(n, false));
    auto model = init_model<float>(n, 50, 4);
    const EmbeddingScorer scorer(vocab, model);
    TokenIndex query = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scorer.top_k(query, 20));
        query = (query + 1) % static_cast<TokenIndex>(n);
    }
}
BENCHMARK(BM_EmbeddingTopK)->Arg(10000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
