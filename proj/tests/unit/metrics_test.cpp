#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "mp2v/error.hpp"
#include "mp2v/metrics.hpp"

using namespace mp2v;

namespace {

Vocabulary plain_vocab(std::size_t n) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("i" + std::to_string(i));
    return Vocabulary(tokens, std::vector<std::int64_t>(n, 1), std::vector<bool>(n, false));
}

// Ranks the listed items first, in list order, for each query; the rest by index.
class FixedScorer final : public Scorer {
public:
    FixedScorer(const Vocabulary& vocab, std::map<TokenIndex, std::vector<TokenIndex>> order)
        : Scorer(vocab), order_(std::move(order)) {}
    std::string name() const override { return "Fixed"; }
    double score(TokenIndex query, TokenIndex candidate) const override {
        auto it = order_.find(query);
        if (it != order_.end())
            for (std::size_t r = 0; r < it->second.size(); ++r)
                if (it->second[r] == candidate) return 1000.0 - static_cast<double>(r);
        return 0.0;
    }

private:
    std::map<TokenIndex, std::vector<TokenIndex>> order_;
};

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("per-user hit ratio and NDCG") {
    const std::vector<TokenIndex> ranked{4, 7, 1, 9};
    CHECK(hit_ratio_at_k(ranked, 7, 10) == doctest::Approx(0.1));
    CHECK(hit_ratio_at_k(ranked, 9, 3) == 0.0);
    CHECK(hit_ratio_at_k(ranked, 5, 10) == 0.0);
    CHECK(hit_ratio_at_k(ranked, kNoToken, 10) == 0.0);
    CHECK(ndcg_at_k(ranked, 4, 10) == 1.0);
    CHECK(ndcg_at_k(ranked, 7, 10) == doctest::Approx(1.0 / std::log2(3.0)));
    CHECK(ndcg_at_k(ranked, 9, 4) == doctest::Approx(1.0 / std::log2(5.0)));
    CHECK(ndcg_at_k(ranked, 9, 3) == 0.0);
    CHECK_THROWS_AS(hit_ratio_at_k(ranked, 4, 0), Error);
}

TEST_CASE("three-user fixture") {
    const auto vocab = plain_vocab(20);
    // User 1 hits at rank 1, user 2 at rank 4, user 3 misses.
    const FixedScorer scorer(vocab, {{0, {1}}, {2, {10, 11, 12, 3}}, {4, {}}});
    const std::vector<EvalCase> cases{{0, 1}, {2, 3}, {4, 19}, {kNoToken, 5}};
    EvalOptions options;
    options.k_list = {10};
    options.bootstrap_samples = 200;
    const EvalReport report = evaluate(scorer, cases, options);
    CHECK(report.evaluated == 3);
    CHECK(report.skipped == 1);
    CHECK(report.metric("HR@10").estimate == doctest::Approx((0.1 + 0.1 + 0.0) / 3.0));
    CHECK(report.metric("NDCG@10").estimate == doctest::Approx((1.0 + 1.0 / std::log2(5.0) + 0.0) / 3.0));
    for (const auto& m : report.metrics) {
        CHECK(m.low <= m.estimate);
        CHECK(m.estimate <= m.high);
    }
    CHECK_THROWS_AS(report.metric("HR@5"), Error);
}

TEST_CASE("a perfect predictor has a degenerate interval") {
    const auto vocab = plain_vocab(30);
    std::map<TokenIndex, std::vector<TokenIndex>> order;
    std::vector<EvalCase> cases;
    for (TokenIndex q = 0; q < 15; ++q) {
        order[q] = {static_cast<TokenIndex>(q + 15)};
        cases.push_back({q, static_cast<TokenIndex>(q + 15)});
    }
    const FixedScorer scorer(vocab, order);
    EvalOptions options;
    options.k_list = {10, 20};
    const EvalReport report = evaluate(scorer, cases, options);
    for (const char* name : {"HR@10", "HR@20"}) {
        const auto& m = report.metric(name);
        CHECK(m.estimate == doctest::Approx(name == std::string("HR@10") ? 0.1 : 0.05));
        CHECK(m.low == m.estimate);
        CHECK(m.high == m.estimate);
    }
    CHECK(report.metric("NDCG@20").estimate == 1.0);
}

TEST_CASE("bootstrap intervals are reproducible and thread independent") {
    const auto vocab = plain_vocab(40);
    std::map<TokenIndex, std::vector<TokenIndex>> order;
    std::vector<EvalCase> cases;
    for (TokenIndex q = 0; q < 20; ++q) {
        order[q] = {static_cast<TokenIndex>((q * 7) % 40)};
        cases.push_back({q, static_cast<TokenIndex>(q % 3 == 0 ? (q * 7) % 40 : 39)});
    }
    const FixedScorer scorer(vocab, order);
    EvalOptions options;
    options.bootstrap_samples = 300;
    const EvalReport one = evaluate(scorer, cases, options);
    options.threads = 3;
    const EvalReport three = evaluate(scorer, cases, options);
    REQUIRE(one.metrics.size() == three.metrics.size());
    for (std::size_t i = 0; i < one.metrics.size(); ++i) {
        CHECK(one.metrics[i].low == three.metrics[i].low);
        CHECK(one.metrics[i].high == three.metrics[i].high);
        CHECK(one.metrics[i].low < one.metrics[i].high);
    }
}

TEST_CASE("percentile interval") {
    std::vector<double> samples(101);
    std::iota(samples.rbegin(), samples.rend(), 0.0);
    const auto [lo, hi] = percentile_interval(samples, 0.90);
    CHECK(lo == doctest::Approx(5.0));
    CHECK(hi == doctest::Approx(95.0));
    std::vector<double> two{0.0, 1.0};
    const auto [a, b] = percentile_interval(two, 0.5);
    CHECK(a == doctest::Approx(0.25));
    CHECK(b == doctest::Approx(0.75));
    std::vector<double> empty;
    CHECK_THROWS_AS(percentile_interval(empty, 0.9), Error);
    CHECK_THROWS_AS(percentile_interval(two, 1.0), Error);
}

TEST_CASE("buckets partition the evaluated users") {
    BucketSpec spec;
    CHECK(spec.bucket_of(0) == 0);
    CHECK(spec.bucket_of(1) == 1);
    CHECK(spec.bucket_of(2) == 1);
    CHECK(spec.bucket_of(3) == 2);
    CHECK(spec.bucket_of(1000) == 2);
    CHECK(spec.label(0) == "freq=0");
    CHECK(spec.label(1) == "freq 1-2");
    CHECK(spec.label(2) == "freq>=3");
    CHECK_THROWS_AS((BucketSpec{{1, 2}}).validate(), Error);
    CHECK_THROWS_AS((BucketSpec{{0, 2, 2}}).validate(), Error);

    const auto vocab = plain_vocab(15);
    const std::vector<std::vector<TokenIndex>> seqs{{0, 1, 0, 1, 0, 1}, {2, 3}};
    const CoCountMatrix counts(15, seqs, 1);
    const FixedScorer scorer(vocab, {{0, {1}}, {2, {3}}, {4, {5}}});
    const std::vector<EvalCase> cases{{0, 1}, {2, 3}, {4, 5}, {5, 14}, {kNoToken, 1}};
    EvalOptions options;
    options.bootstrap_samples = 0;
    options.pair_counts = &counts;
    options.bucket_k = 10;
    const EvalReport report = evaluate(scorer, cases, options);
    REQUIRE(report.buckets.size() == 3);
    std::size_t users = 0;
    for (const auto& b : report.buckets) users += b.users;
    CHECK(users == report.evaluated);
    CHECK(report.buckets[0].users == 2);
    CHECK(report.buckets[1].users == 1);
    CHECK(report.buckets[2].users == 1);
    CHECK(*report.buckets[2].hit_ratio == doctest::Approx(0.1));
    CHECK(*report.buckets[0].hit_ratio == doctest::Approx(0.05));
    CHECK_FALSE(report.buckets[2].max.has_value());
    CHECK(*report.buckets[1].max == 2);

    const auto direct = cold_start_report(scorer, cases, counts, spec, 10);
    for (std::size_t b = 0; b < 3; ++b) CHECK(direct[b].users == report.buckets[b].users);
}

TEST_CASE("no evaluable users is an error") {
    const auto vocab = plain_vocab(3);
    const FixedScorer scorer(vocab, {});
    const std::vector<EvalCase> cases{{kNoToken, 1}, {kNoToken, 2}};
    CHECK_THROWS_AS(evaluate(scorer, cases, EvalOptions{}), Error);
}

TEST_CASE("evaluation cases come from the split") {
    const std::vector<Session> sessions{{"u1", {"a", "b", "c", "d"}}, {"u2", {"x", "a", "q"}}, {"u3", {"a", "b"}}};
    const SplitCorpus final_split = split_sessions(sessions, Phase::kFinal);
    const Vocabulary vocab = build_vocabulary(final_split.train, {}, 1);
    const auto cases = make_eval_cases(final_split, vocab);
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].query == vocab.find("c"));
    CHECK(cases[0].target == kNoToken);  // d never appears in training
    CHECK(cases[1].query == vocab.find("a"));
}

TEST_CASE("report JSON layout") {
    EvalReport r;
    r.method = "CoCounts";
    r.metrics = {{"HR@10", 0.05, 0.04, 0.06}};
    r.bucket_k = 20;
    r.buckets = {{"freq=0", 0, 0, 10, 0.01}, {"freq>=3", 3, std::nullopt, 0, std::nullopt}};
    r.evaluated = 10;
    r.skipped = 2;
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["method"] == "CoCounts");
    CHECK(j["metrics"]["HR@10"]["est"] == 0.05);
    CHECK(j["metrics"]["HR@10"]["lo"] == 0.04);
    CHECK(j["metrics"]["HR@10"]["hi"] == 0.06);
    CHECK(j["buckets"][0]["HR@20"] == 0.01);
    CHECK(j["buckets"][1]["max"].is_null());
    CHECK_FALSE(j["buckets"][1].contains("HR@20"));
    CHECK(j["evaluated"] == 10);
    CHECK(j["skipped"] == 2);
}

}  // TEST_SUITE
