#include "mp2v/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "mp2v/error.hpp"
#include "mp2v/sampler.hpp"

namespace mp2v {
namespace {

// 1-based rank of target within the first k entries, 0 if absent.
std::size_t rank_within(std::span<const TokenIndex> ranked, TokenIndex target, std::size_t k) {
    if (target == kNoToken) return 0;
    const std::size_t n = std::min(k, ranked.size());
    for (std::size_t i = 0; i < n; ++i)
        if (ranked[i] == target) return i + 1;
    return 0;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
}

std::uint64_t resample_seed(std::uint64_t seed, std::uint64_t b) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (b + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

double hit_ratio_at_k(std::span<const TokenIndex> ranked, TokenIndex target, std::size_t k) {
    if (k < 1) throw Error("K must be >= 1");
    return rank_within(ranked, target, k) ? 1.0 / static_cast<double>(k) : 0.0;
}

double ndcg_at_k(std::span<const TokenIndex> ranked, TokenIndex target, std::size_t k) {
    if (k < 1) throw Error("K must be >= 1");
    const std::size_t r = rank_within(ranked, target, k);
    return r ? 1.0 / std::log2(static_cast<double>(r) + 1.0) : 0.0;
}

std::vector<EvalCase> make_eval_cases(const SplitCorpus& split, const Vocabulary& vocab) {
    const auto& targets = split.targets();
    std::vector<EvalCase> cases;
    cases.reserve(split.train.size());
    for (std::size_t u = 0; u < split.train.size(); ++u) {
        EvalCase c;
        c.query = split.train[u].empty() ? kNoToken : vocab.find(split.train[u].back());
        if (c.query != kNoToken && vocab.is_metadata(c.query)) c.query = kNoToken;
        c.target = vocab.find(targets.at(u));
        if (c.target != kNoToken && vocab.is_metadata(c.target)) c.target = kNoToken;
        cases.push_back(c);
    }
    return cases;
}

std::size_t BucketSpec::bucket_of(std::int64_t frequency) const {
    auto it = std::upper_bound(edges.begin(), edges.end(), frequency);
    if (it == edges.begin()) throw Error("pair frequency below the first bucket edge");
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::string BucketSpec::label(std::size_t bucket) const {
    const std::int64_t lo = edges.at(bucket);
    if (bucket + 1 == edges.size()) return "freq>=" + std::to_string(lo);
    const std::int64_t hi = edges[bucket + 1] - 1;
    if (lo == hi) return "freq=" + std::to_string(lo);
    return "freq " + std::to_string(lo) + "-" + std::to_string(hi);
}

void BucketSpec::validate() const {
    if (edges.empty() || edges.front() != 0) throw Error("bucket edges must start at 0");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw Error("bucket edges must be strictly increasing");
}

std::pair<double, double> percentile_interval(std::vector<double>& samples, double confidence) {
    if (samples.empty()) throw Error("percentile interval of an empty sample");
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence must lie in (0, 1)");
    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(samples.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, samples.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return samples[lo] + frac * (samples[hi] - samples[lo]);
    };
    const double tail = (1.0 - confidence) / 2.0;
    return {quantile(tail), quantile(1.0 - tail)};
}

const MetricEstimate& EvalReport::metric(std::string_view name) const {
    for (const auto& m : metrics)
        if (m.name == name) return m;
    throw Error("report has no metric " + std::string(name));
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["method"] = method;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& e : metrics) m[e.name] = {{"est", e.estimate}, {"lo", e.low}, {"hi", e.high}};
    j["metrics"] = std::move(m);
    nlohmann::ordered_json b = nlohmann::ordered_json::array();
    for (const auto& r : buckets) {
        nlohmann::ordered_json entry;
        entry["label"] = r.label;
        entry["min"] = r.min;
        entry["max"] = r.max ? nlohmann::ordered_json(*r.max) : nlohmann::ordered_json(nullptr);
        entry["users"] = r.users;
        if (r.hit_ratio) entry["HR@" + std::to_string(bucket_k)] = *r.hit_ratio;
        b.push_back(std::move(entry));
    }
    j["buckets"] = std::move(b);
    j["evaluated"] = evaluated;
    j["skipped"] = skipped;
    return j.dump(2) + "\n";
}

namespace {

std::vector<BucketResult> bucketize(std::span<const EvalCase* const> active, std::span<const double> hit_ratio,
                                    const CoCountMatrix& pair_counts, const BucketSpec& buckets) {
    std::vector<BucketResult> out(buckets.size());
    std::vector<double> sums(buckets.size(), 0.0);
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        out[b].label = buckets.label(b);
        out[b].min = buckets.edges[b];
        if (b + 1 < buckets.size()) out[b].max = buckets.edges[b + 1] - 1;
    }
    const auto n = static_cast<TokenIndex>(pair_counts.size());
    for (std::size_t u = 0; u < active.size(); ++u) {
        const EvalCase& c = *active[u];
        std::int64_t freq = 0;
        if (c.target != kNoToken && c.query < n && c.target < n) {
            freq = static_cast<std::int64_t>(pair_counts.count(c.query, c.target));
        }
        const std::size_t b = buckets.bucket_of(freq);
        ++out[b].users;
        sums[b] += hit_ratio[u];
    }
    for (std::size_t b = 0; b < buckets.size(); ++b)
        if (out[b].users) out[b].hit_ratio = sums[b] / static_cast<double>(out[b].users);
    return out;
}

std::vector<TokenIndex> ranked_items(const Scorer& scorer, TokenIndex query, std::size_t k) {
    const auto top = scorer.top_k(query, k);
    std::vector<TokenIndex> ranked;
    ranked.reserve(top.size());
    for (const auto& s : top) ranked.push_back(s.item);
    return ranked;
}

}  // namespace

std::vector<BucketResult> cold_start_report(const Scorer& scorer, std::span<const EvalCase> cases,
                                            const CoCountMatrix& pair_counts, const BucketSpec& buckets,
                                            std::size_t k, unsigned threads) {
    buckets.validate();
    if (k < 1) throw Error("K must be >= 1");
    std::vector<const EvalCase*> active;
    for (const auto& c : cases)
        if (c.query != kNoToken) active.push_back(&c);

    std::vector<double> hr(active.size());
    parallel_for(active.size(), threads, [&](std::size_t u) {
        hr[u] = hit_ratio_at_k(ranked_items(scorer, active[u]->query, k), active[u]->target, k);
    });
    return bucketize(active, hr, pair_counts, buckets);
}

EvalReport evaluate(const Scorer& scorer, std::span<const EvalCase> cases, const EvalOptions& options) {
    if (options.k_list.empty()) throw Error("K list is empty");
    if (options.pair_counts) options.buckets.validate();
    for (std::size_t k : options.k_list)
        if (k < 1) throw Error("K must be >= 1");

    EvalReport report;
    report.method = scorer.name();
    std::vector<const EvalCase*> active;
    for (const auto& c : cases) {
        if (c.query == kNoToken) {
            ++report.skipped;
        } else {
            active.push_back(&c);
        }
    }
    report.evaluated = active.size();
    if (active.empty()) throw Error("no evaluable users (all query items are out of vocabulary)");

    const std::size_t max_k = std::max(*std::max_element(options.k_list.begin(), options.k_list.end()),
                                       options.pair_counts ? options.bucket_k : std::size_t{1});
    const std::size_t n_metrics = options.k_list.size() * 2;
    // values[m * n + u]: metric m of user u; metrics ordered HR@k, NDCG@k per k.
    const std::size_t n = active.size();
    std::vector<double> values(n_metrics * n);
    std::vector<double> bucket_hits(options.pair_counts ? n : 0);
    parallel_for(n, options.threads, [&](std::size_t u) {
        const auto ranked = ranked_items(scorer, active[u]->query, max_k);
        if (options.pair_counts) bucket_hits[u] = hit_ratio_at_k(ranked, active[u]->target, options.bucket_k);
        for (std::size_t i = 0; i < options.k_list.size(); ++i) {
            const std::size_t k = options.k_list[i];
            values[(2 * i) * n + u] = hit_ratio_at_k(ranked, active[u]->target, k);
            values[(2 * i + 1) * n + u] = ndcg_at_k(ranked, active[u]->target, k);
        }
    });

    std::vector<double> estimates(n_metrics, 0.0);
    for (std::size_t m = 0; m < n_metrics; ++m) {
        double sum = 0.0;
        for (std::size_t u = 0; u < n; ++u) sum += values[m * n + u];
        estimates[m] = sum / static_cast<double>(n);
    }

    // Resample indices depend only on (seed, b), so intervals do not depend on threads.
    const std::size_t samples = options.bootstrap_samples;
    std::vector<double> boot(n_metrics * samples, 0.0);
    if (samples > 0) {
        parallel_for(samples, options.threads, [&](std::size_t b) {
            Rng rng(resample_seed(options.seed, b));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            std::vector<double> sums(n_metrics, 0.0);
            for (std::size_t draw = 0; draw < n; ++draw) {
                const std::size_t u = pick(rng);
                for (std::size_t m = 0; m < n_metrics; ++m) sums[m] += values[m * n + u];
            }
            for (std::size_t m = 0; m < n_metrics; ++m) boot[m * samples + b] = sums[m] / static_cast<double>(n);
        });
    }

    for (std::size_t i = 0; i < options.k_list.size(); ++i) {
        const std::string k = std::to_string(options.k_list[i]);
        for (std::size_t which = 0; which < 2; ++which) {
            const std::size_t m = 2 * i + which;
            MetricEstimate e;
            e.name = (which == 0 ? "HR@" : "NDCG@") + k;
            e.estimate = estimates[m];
            e.low = e.high = e.estimate;
            if (samples > 0) {
                std::vector<double> dist(boot.begin() + static_cast<std::ptrdiff_t>(m * samples),
                                         boot.begin() + static_cast<std::ptrdiff_t>((m + 1) * samples));
                const auto [lo, hi] = percentile_interval(dist, options.confidence);
                // The percentile interval need not contain the plug-in estimate; widen it if so.
                e.low = std::min(lo, e.estimate);
                e.high = std::max(hi, e.estimate);
            }
            report.metrics.push_back(std::move(e));
        }
    }

    if (options.pair_counts) {
        report.bucket_k = options.bucket_k;
        report.buckets = bucketize(active, bucket_hits, *options.pair_counts, options.buckets);
    }
    return report;
}

}  // namespace mp2v
