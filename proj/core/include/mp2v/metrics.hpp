#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mp2v/corpus.hpp"
#include "mp2v/scorers.hpp"

namespace mp2v {

/// 1/K when `target` is among the first K entries, else 0.
double hit_ratio_at_k(std::span<const TokenIndex> ranked, TokenIndex target, std::size_t k);
/// 1/log2(rank + 1) for the 1-based rank of `target` if rank <= K, else 0.
double ndcg_at_k(std::span<const TokenIndex> ranked, TokenIndex target, std::size_t k);

/// One evaluated user: the last training item and the held-out next item.
/// kNoToken query means the user is skipped; kNoToken target is always a miss.
struct EvalCase {
    TokenIndex query = kNoToken;
    TokenIndex target = kNoToken;
};

std::vector<EvalCase> make_eval_cases(const SplitCorpus& split, const Vocabulary& vocab);

/// Half-open pair-frequency ranges [edges[i], edges[i+1]); the last is unbounded.
/// The default {0, 1, 3} yields freq=0, freq 1-2 and freq>=3.
struct BucketSpec {
    std::vector<std::int64_t> edges{0, 1, 3};

    std::size_t size() const noexcept { return edges.size(); }
    std::size_t bucket_of(std::int64_t frequency) const;
    std::string label(std::size_t bucket) const;
    void validate() const;
};

struct BucketResult {
    std::string label;
    std::int64_t min = 0;
    std::optional<std::int64_t> max;  // inclusive; nullopt = unbounded
    std::size_t users = 0;
    std::optional<double> hit_ratio;  // absent for empty buckets
};

struct MetricEstimate {
    std::string name;  // e.g. "HR@10"
    double estimate = 0.0;
    double low = 0.0;
    double high = 0.0;
};

struct EvalReport {
    std::string method;
    std::vector<MetricEstimate> metrics;
    std::size_t bucket_k = 0;
    std::vector<BucketResult> buckets;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;

    const MetricEstimate& metric(std::string_view name) const;
    /// {method, metrics: {"HR@10": {est, lo, hi}, ...}, buckets: [...], evaluated, skipped}
    std::string to_json() const;
};

struct EvalOptions {
    std::vector<std::size_t> k_list{10, 20};
    std::size_t bootstrap_samples = 1000;
    double confidence = 0.90;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// When set, the report includes an HR@bucket_k breakdown by training
    /// co-occurrence count of (query, target).
    const CoCountMatrix* pair_counts = nullptr;
    BucketSpec buckets;
    std::size_t bucket_k = 20;
};

/// Averages per-user HR@K and NDCG@K; percentile-bootstrap intervals over users.
EvalReport evaluate(const Scorer& scorer, std::span<const EvalCase> cases, const EvalOptions& options);

std::vector<BucketResult> cold_start_report(const Scorer& scorer, std::span<const EvalCase> cases,
                                            const CoCountMatrix& pair_counts, const BucketSpec& buckets,
                                            std::size_t k, unsigned threads = 1);

/// Percentile interval [q_lo, q_hi] of `samples` (sorted in place), linear interpolation.
std::pair<double, double> percentile_interval(std::vector<double>& samples, double confidence);

}  // namespace mp2v
