#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mp2v/error.hpp"
#include "mp2v/scorers.hpp"
#include "oracles.hpp"

using namespace mp2v;

namespace {

Vocabulary items_vocab(std::vector<std::string> tokens, std::vector<std::int64_t> freqs, std::size_t meta = 0) {
    std::vector<bool> flags(tokens.size(), false);
    for (std::size_t i = tokens.size() - meta; i < tokens.size(); ++i) flags[i] = true;
    return Vocabulary(std::move(tokens), std::move(freqs), std::move(flags));
}

std::vector<std::vector<TokenIndex>> random_sequences(std::size_t count, TokenIndex vocab, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TokenIndex> pick(0, vocab - 1);
    std::uniform_int_distribution<int> len(1, 8);
    std::vector<std::vector<TokenIndex>> out(count);
    for (auto& s : out) {
        const int n = len(rng);
        for (int i = 0; i < n; ++i) s.push_back(pick(rng));
    }
    return out;
}

}  // namespace

TEST_SUITE("scorers") {

TEST_CASE("cosine basics") {
    const std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, z{0, 0}, d{1, 1};
    CHECK(cosine(a, b) == 0.0);
    CHECK(cosine(a, c) == doctest::Approx(1.0));
    CHECK(cosine(a, z) == 0.0);
    CHECK(cosine(a, d) == doctest::Approx(1.0 / std::sqrt(2.0)));
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(cosine(a, three), Error);
}

TEST_CASE("co-occurrence counts of a short sequence") {
    const std::vector<std::vector<TokenIndex>> seqs{{0, 1, 2}};
    const CoCountMatrix m(3, seqs, 1);
    CHECK(m.count(0, 1) == 1.0);
    CHECK(m.count(1, 2) == 1.0);
    CHECK(m.count(0, 2) == 0.0);
    CHECK(m.count(0, 0) == 0.0);
    CHECK(CoCountMatrix(3, seqs, 2).count(0, 2) == 1.0);

    const auto vocab = items_vocab({"a", "b", "c"}, {1, 1, 1});
    const CoCountsScorer scorer(vocab, m, CoCountSimilarity::kNormalizedCount);
    const auto top = scorer.top_k("a", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].item == 1);
    CHECK(top[0].score > top[1].score);
}

TEST_CASE("co-occurrence counts agree with direct enumeration") {
    for (int window : {1, 2, 4}) {
        const auto seqs = random_sequences(60, 12, static_cast<std::uint64_t>(window));
        const CoCountMatrix m(12, seqs, window);
        const auto brute = oracle::count_cooccurrences(seqs, window, false);
        for (TokenIndex i = 0; i < 12; ++i) {
            std::int64_t occ = 0;
            for (const auto& s : seqs) occ += std::count(s.begin(), s.end(), i);
            CHECK(m.occurrences(i) == occ);
            double norm = 0.0;
            for (TokenIndex j = 0; j < 12; ++j) {
                auto it = brute.find({i, j});
                const double expected = it == brute.end() ? 0.0 : it->second;
                CHECK(m.count(i, j) == expected);
                CHECK(m.count(i, j) == m.count(j, i));
                norm += expected * expected;
            }
            CHECK(m.row_norm(i) == doctest::Approx(std::sqrt(norm)));
        }
    }
}

TEST_CASE("co-occurrence scorer batch and single scores agree") {
    const auto seqs = random_sequences(80, 15, 3);
    const CoCountMatrix m(15, seqs, 2);
    std::vector<std::string> tokens;
    for (int i = 0; i < 15; ++i) tokens.push_back("t" + std::to_string(i));
    const auto vocab = items_vocab(tokens, std::vector<std::int64_t>(15, 1));
    for (auto sim : {CoCountSimilarity::kRowCosine, CoCountSimilarity::kNormalizedCount}) {
        const CoCountsScorer scorer(vocab, m, sim);
        for (TokenIndex q = 0; q < 15; ++q) {
            std::vector<double> batch(scorer.candidates().size());
            scorer.score_many(q, scorer.candidates(), batch);
            for (std::size_t c = 0; c < batch.size(); ++c) {
                CHECK(batch[c] == scorer.score(q, scorer.candidates()[c]));
                CHECK(scorer.score(q, scorer.candidates()[c]) == doctest::Approx(scorer.score(scorer.candidates()[c], q)));
            }
        }
    }
}

TEST_CASE("popularity baseline") {
    const auto vocab = items_vocab({"a", "b", "c", "d", "artist:x"}, {9, 5, 5, 1, 20}, 1);
    const BestOfScorer scorer(vocab);
    auto top = scorer.top_k("d", 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0] == ScoredItem{0, 1.0});
    CHECK(top[1].item == 1);
    CHECK(top[2].item == 2);
    CHECK(top[1].score == doctest::Approx(5.0 / 9.0));
    // The query is excluded.
    top = scorer.top_k("a", 2);
    CHECK(top[0].item == 1);
    CHECK(top[1].item == 2);
    CHECK(scorer.top_k("a", 10).size() == 3);
}

TEST_CASE("embedding scorer") {
    const auto vocab = items_vocab({"a", "b", "c", "d", "artist:x"}, {1, 1, 1, 1, 1}, 1);
    EmbeddingModel m(5, 2);
    auto set = [&](TokenIndex i, float x, float y) {
        m.input(i)[0] = x;
        m.input(i)[1] = y;
    };
    set(0, 1, 0);
    set(1, 1, 0);  // duplicate of a
    set(2, 0, 1);
    set(3, 1, 1);
    set(4, 1, 0);  // metadata token identical to a
    const EmbeddingScorer scorer(vocab, m);
    const auto top = scorer.top_k("a", 4);
    REQUIRE(top.size() == 3);
    CHECK(top[0] == ScoredItem{1, 1.0});
    CHECK(top[1].item == 3);
    CHECK(top[1].score == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(top[2].item == 2);
    for (const auto& s : top) CHECK_FALSE(vocab.is_metadata(s.item));

    // Concatenated rows: output vectors break the tie between a and b.
    m.output(1)[0] = 1;
    const EmbeddingScorer both(vocab, m, "Embedding", TableSelection::kBoth);
    CHECK(both.score(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
    const EmbeddingScorer out(vocab, m, "Embedding", TableSelection::kOutput);
    CHECK(out.score(0, 1) == 0.0);
}

TEST_CASE("top-k is a prefix of the exhaustive ranking") {
    const std::size_t n = 40;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(i));
    const auto vocab = items_vocab(tokens, std::vector<std::int64_t>(n, 1));
    EmbeddingModel m(n, 3);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coarse(-2, 2);  // small range forces ties
    for (float& v : m.input_table()) v = static_cast<float>(coarse(rng));
    const EmbeddingScorer scorer(vocab, m);
    for (TokenIndex q = 0; q < static_cast<TokenIndex>(n); ++q) {
        std::vector<ScoredItem> all;
        for (TokenIndex c = 0; c < static_cast<TokenIndex>(n); ++c)
            if (c != q) all.push_back({c, scorer.score(q, c)});
        std::stable_sort(all.begin(), all.end(), [](const ScoredItem& x, const ScoredItem& y) { return x.score > y.score; });
        for (std::size_t k : {1u, 5u, 17u, 39u}) {
            const auto top = scorer.top_k(q, k);
            REQUIRE(top.size() == k);
            for (std::size_t r = 0; r < k; ++r) CHECK(top[r] == all[r]);
        }
    }
}

TEST_CASE("mix endpoints reproduce their components") {
    const auto seqs = random_sequences(100, 20, 11);
    const CoCountMatrix counts(20, seqs, 2);
    std::vector<std::string> tokens;
    for (int i = 0; i < 20; ++i) tokens.push_back("t" + std::to_string(i));
    const auto vocab = items_vocab(tokens, std::vector<std::int64_t>(20, 1));
    auto model = init_model<float>(20, 4, 5);
    const EmbeddingScorer emb(vocab, model);
    const CoCountsScorer co(vocab, counts);
    for (TokenIndex q = 0; q < 20; ++q) {
        const auto only_emb = MixScorer(1.0, emb, co).top_k(q, 10);
        const auto only_co = MixScorer(0.0, emb, co).top_k(q, 10);
        const auto e = emb.top_k(q, 10);
        const auto c = co.top_k(q, 10);
        for (std::size_t r = 0; r < 10; ++r) {
            CHECK(only_emb[r].item == e[r].item);
            CHECK(only_co[r].score == doctest::Approx(c[r].score));
        }
        const auto half = mix_top_k(0.5, emb, co, q, 5, 500);
        for (const auto& s : half)
            CHECK(s.score == doctest::Approx(0.5 * emb.score(q, s.item) + 0.5 * co.score(q, s.item)));
    }
    CHECK_THROWS_AS(MixScorer(1.5, emb, co), Error);
}

TEST_CASE("unknown queries are reported by name") {
    const auto vocab = items_vocab({"a", "b"}, {2, 1});
    const BestOfScorer scorer(vocab);
    try {
        scorer.top_k("zzz", 1);
        FAIL("expected an error");
    } catch (const UnknownTokenError& e) {
        CHECK(std::string(e.what()).find("zzz") != std::string::npos);
    }
    CHECK_THROWS_AS(scorer.top_k(TokenIndex{5}, 1), UnknownTokenError);
}

}  // TEST_SUITE
