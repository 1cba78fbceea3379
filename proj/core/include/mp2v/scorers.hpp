#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mp2v/corpus.hpp"
#include "mp2v/embedding.hpp"

namespace mp2v {

/// Symmetric windowed co-occurrence counts between items: count(i, j) is the
/// number of position pairs at distance 1..window holding i and j. The
/// diagonal is not stored.
class CoCountMatrix {
public:
    CoCountMatrix() = default;
    CoCountMatrix(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window);

    std::size_t size() const noexcept { return rows_.size(); }
    int window() const noexcept { return window_; }

    /// Sorted (column, count) entries of one row.
    std::span<const std::pair<TokenIndex, double>> row(TokenIndex i) const {
        return rows_.at(static_cast<std::size_t>(i));
    }
    double count(TokenIndex i, TokenIndex j) const;
    double row_norm(TokenIndex i) const { return norms_.at(static_cast<std::size_t>(i)); }
    /// Occurrences of the item in the training sequences.
    std::int64_t occurrences(TokenIndex i) const { return occurrences_.at(static_cast<std::size_t>(i)); }

private:
    int window_ = 0;
    std::vector<std::vector<std::pair<TokenIndex, double>>> rows_;
    std::vector<double> norms_;
    std::vector<std::int64_t> occurrences_;
};

CoCountMatrix build_cocounts(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window);

/// u.v / (|u||v|), 0 if either norm is 0. Throws on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

struct ScoredItem {
    TokenIndex item;
    double score;

    bool operator==(const ScoredItem&) const = default;
};

/// Ranks candidate items for a query item. Candidates are the non-metadata
/// tokens of the vocabulary; the query itself is never returned.
class Scorer {
public:
    explicit Scorer(const Vocabulary& vocab);
    virtual ~Scorer() = default;

    virtual std::string name() const = 0;
    virtual double score(TokenIndex query, TokenIndex candidate) const = 0;
    /// out[i] = score(query, candidates[i]); overridden where a batch is cheaper.
    virtual void score_many(TokenIndex query, std::span<const TokenIndex> candidates, std::span<double> out) const;

    /// The K best candidates by score (ties by ascending index), scores non-increasing.
    /// Throws UnknownTokenError for an out-of-range query.
    virtual std::vector<ScoredItem> top_k(TokenIndex query, std::size_t k) const;
    std::vector<ScoredItem> top_k(std::string_view query, std::size_t k) const;

    const Vocabulary& vocabulary() const noexcept { return *vocab_; }
    std::span<const TokenIndex> candidates() const noexcept { return candidates_; }

protected:
    void check_query(TokenIndex query) const;
    /// Selects the top k of (item, score) pairs in place and sorts them.
    static std::vector<ScoredItem> select_top(std::vector<ScoredItem> scored, std::size_t k);

private:
    const Vocabulary* vocab_;
    std::vector<TokenIndex> candidates_;
};

/// Popularity baseline: score is the training frequency relative to the most frequent item.
class BestOfScorer final : public Scorer {
public:
    explicit BestOfScorer(const Vocabulary& vocab);

    std::string name() const override { return "BestOf"; }
    double score(TokenIndex query, TokenIndex candidate) const override;
    std::vector<ScoredItem> top_k(TokenIndex query, std::size_t k) const override;
    using Scorer::top_k;

private:
    std::vector<TokenIndex> by_popularity_;
    double max_frequency_ = 1.0;
};

enum class CoCountSimilarity {
    kRowCosine,        // cosine between co-occurrence rows
    kNormalizedCount,  // X_ij / sqrt(X_i X_j), clamped to 1
};

class CoCountsScorer final : public Scorer {
public:
    CoCountsScorer(const Vocabulary& vocab, const CoCountMatrix& counts,
                   CoCountSimilarity similarity = CoCountSimilarity::kRowCosine);

    std::string name() const override { return "CoCounts"; }
    double score(TokenIndex query, TokenIndex candidate) const override;
    void score_many(TokenIndex query, std::span<const TokenIndex> candidates, std::span<double> out) const override;
    std::vector<ScoredItem> top_k(TokenIndex query, std::size_t k) const override;
    using Scorer::top_k;

private:
    /// Row-cosine numerators against every item reachable in two hops.
    /// Sums run over the query's neighbours in ascending order, the same
    /// order as the sorted-row merge in score(), so values agree bitwise.
    void two_hop_dots(TokenIndex query, std::vector<double>& dots, std::vector<TokenIndex>& touched) const;

    const CoCountMatrix* counts_;
    CoCountSimilarity similarity_;
};

/// Cosine similarity between item vectors. With kBoth an item is represented
/// by its input vector followed by its output vector. Rows and their norms
/// are copied at construction.
class EmbeddingScorer final : public Scorer {
public:
    EmbeddingScorer(const Vocabulary& vocab, const EmbeddingModel& model, std::string name = "Embedding",
                    TableSelection table = TableSelection::kInput);

    std::string name() const override { return name_; }
    double score(TokenIndex query, TokenIndex candidate) const override;
    void score_many(TokenIndex query, std::span<const TokenIndex> candidates, std::span<double> out) const override;
    std::vector<ScoredItem> top_k(TokenIndex query, std::size_t k) const override;
    using Scorer::top_k;

private:
    double cosine_rows(TokenIndex query, TokenIndex candidate) const {
        const double nq = squared_norms_[static_cast<std::size_t>(query)];
        const double nc = squared_norms_[static_cast<std::size_t>(candidate)];
        if (nq == 0.0 || nc == 0.0) return 0.0;
        const double* q = rows_.data() + static_cast<std::size_t>(query) * dim_;
        const double* c = rows_.data() + static_cast<std::size_t>(candidate) * dim_;
        // Four independent partial sums; the order is fixed, so results are reproducible.
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t d = 0;
        for (; d + 4 <= dim_; d += 4) {
            acc[0] += q[d] * c[d];
            acc[1] += q[d + 1] * c[d + 1];
            acc[2] += q[d + 2] * c[d + 2];
            acc[3] += q[d + 3] * c[d + 3];
        }
        for (; d < dim_; ++d) acc[0] += q[d] * c[d];
        return ((acc[0] + acc[1]) + (acc[2] + acc[3])) / std::sqrt(nq * nc);
    }

    std::span<const double> row(TokenIndex i) const {
        return {rows_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }

    std::string name_;
    std::size_t dim_;
    std::vector<double> rows_;
    std::vector<double> squared_norms_;
};

/// alpha * A + (1 - alpha) * B, ranked over the union of each component's
/// top `pool_size` candidates.
class MixScorer final : public Scorer {
public:
    MixScorer(double alpha, const Scorer& a, const Scorer& b, std::size_t pool_size = 500,
              std::string name = "");

    std::string name() const override { return name_; }
    double alpha() const noexcept { return alpha_; }
    double score(TokenIndex query, TokenIndex candidate) const override;
    std::vector<ScoredItem> top_k(TokenIndex query, std::size_t k) const override;
    using Scorer::top_k;

private:
    double alpha_;
    const Scorer* a_;
    const Scorer* b_;
    std::size_t pool_size_;
    std::string name_;
};

std::vector<ScoredItem> mix_top_k(double alpha, const Scorer& embedding, const Scorer& cocounts,
                                  TokenIndex query, std::size_t k, std::size_t pool_size);

}  // namespace mp2v
