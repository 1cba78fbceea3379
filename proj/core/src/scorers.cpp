#include "mp2v/scorers.hpp"

#include <algorithm>
#include <cmath>

#include "mp2v/error.hpp"

namespace mp2v {

CoCountMatrix::CoCountMatrix(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window)
    : window_(window), rows_(size), norms_(size, 0.0), occurrences_(size, 0) {
    if (window < 1) throw Error("window must be >= 1");
    std::vector<std::unordered_map<TokenIndex, double>> acc(size);
    for (const auto& seq : sequences) {
        const std::size_t n = seq.size();
        for (std::size_t p = 0; p < n; ++p) {
            const TokenIndex a = seq[p];
            if (a < 0 || static_cast<std::size_t>(a) >= size) throw Error("co-count: token index out of range");
            ++occurrences_[static_cast<std::size_t>(a)];
            const std::size_t last = std::min(n - 1, p + static_cast<std::size_t>(window));
            for (std::size_t q = p + 1; q <= last; ++q) {
                const TokenIndex b = seq[q];
                if (a == b) continue;
                acc[static_cast<std::size_t>(a)][b] += 1.0;
                acc[static_cast<std::size_t>(b)][a] += 1.0;
            }
        }
    }
    for (std::size_t i = 0; i < size; ++i) {
        rows_[i].assign(acc[i].begin(), acc[i].end());
        std::sort(rows_[i].begin(), rows_[i].end());
        double sq = 0.0;
        for (const auto& [col, c] : rows_[i]) sq += c * c;
        norms_[i] = std::sqrt(sq);
    }
}

double CoCountMatrix::count(TokenIndex i, TokenIndex j) const {
    const auto r = row(i);
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const auto& e, TokenIndex col) { return e.first < col; });
    return it != r.end() && it->first == j ? it->second : 0.0;
}

CoCountMatrix build_cocounts(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window) {
    return CoCountMatrix(size, sequences, window);
}

namespace {

template <typename Real>
double cosine_impl(std::span<const Real> u, std::span<const Real> v) {
    if (u.size() != v.size()) {
        throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
    }
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i], b = v[i];
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if (uu == 0.0 || vv == 0.0) return 0.0;
    return uv / std::sqrt(uu * vv);
}

bool ranks_before(const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

Scorer::Scorer(const Vocabulary& vocab) : vocab_(&vocab) {
    candidates_.reserve(vocab.item_count());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto index = static_cast<TokenIndex>(i);
        if (!vocab.is_metadata(index)) candidates_.push_back(index);
    }
}

void Scorer::check_query(TokenIndex query) const {
    if (query < 0 || static_cast<std::size_t>(query) >= vocab_->size()) {
        throw UnknownTokenError("#" + std::to_string(query));
    }
}

std::vector<ScoredItem> Scorer::select_top(std::vector<ScoredItem> scored, std::size_t k) {
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), ranks_before);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), ranks_before);
    }
    return scored;
}

void Scorer::score_many(TokenIndex query, std::span<const TokenIndex> candidates, std::span<double> out) const {
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = score(query, candidates[i]);
}

std::vector<ScoredItem> Scorer::top_k(TokenIndex query, std::size_t k) const {
    check_query(query);
    if (k < 1) throw Error("K must be >= 1");
    std::vector<ScoredItem> scored;
    scored.reserve(candidates_.size());
    for (TokenIndex c : candidates_)
        if (c != query) scored.push_back({c, score(query, c)});
    return select_top(std::move(scored), k);
}

std::vector<ScoredItem> Scorer::top_k(std::string_view query, std::size_t k) const {
    return top_k(vocab_->index_of(query), k);
}

BestOfScorer::BestOfScorer(const Vocabulary& vocab) : Scorer(vocab) {
    by_popularity_.assign(candidates().begin(), candidates().end());
    std::stable_sort(by_popularity_.begin(), by_popularity_.end(), [&](TokenIndex a, TokenIndex b) {
        return vocab.frequency(a) > vocab.frequency(b);
    });
    if (!by_popularity_.empty()) max_frequency_ = std::max<double>(1.0, static_cast<double>(vocab.frequency(by_popularity_.front())));
}

double BestOfScorer::score(TokenIndex, TokenIndex candidate) const {
    return static_cast<double>(vocabulary().frequency(candidate)) / max_frequency_;
}

std::vector<ScoredItem> BestOfScorer::top_k(TokenIndex query, std::size_t k) const {
    check_query(query);
    if (k < 1) throw Error("K must be >= 1");
    std::vector<ScoredItem> out;
    for (TokenIndex c : by_popularity_) {
        if (out.size() == k) break;
        if (c != query) out.push_back({c, score(query, c)});
    }
    return out;
}

CoCountsScorer::CoCountsScorer(const Vocabulary& vocab, const CoCountMatrix& counts, CoCountSimilarity similarity)
    : Scorer(vocab), counts_(&counts), similarity_(similarity) {
    if (counts.size() > vocab.size()) throw Error("co-count matrix larger than vocabulary");
}

double CoCountsScorer::score(TokenIndex query, TokenIndex candidate) const {
    const auto n = static_cast<TokenIndex>(counts_->size());
    if (query >= n || candidate >= n || query == candidate) return 0.0;
    if (similarity_ == CoCountSimilarity::kNormalizedCount) {
        const double xi = static_cast<double>(counts_->occurrences(query));
        const double xj = static_cast<double>(counts_->occurrences(candidate));
        if (xi == 0.0 || xj == 0.0) return 0.0;
        return std::min(1.0, counts_->count(query, candidate) / std::sqrt(xi * xj));
    }
    const double nq = counts_->row_norm(query), nc = counts_->row_norm(candidate);
    if (nq == 0.0 || nc == 0.0) return 0.0;
    // Sparse dot product of the two sorted rows.
    const auto a = counts_->row(query);
    const auto b = counts_->row(candidate);
    double dot = 0.0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            dot += a[i++].second * b[j++].second;
        }
    }
    return dot / (nq * nc);
}

void CoCountsScorer::two_hop_dots(TokenIndex query, std::vector<double>& dots, std::vector<TokenIndex>& touched) const {
    dots.assign(counts_->size(), 0.0);
    touched.clear();
    for (const auto& [nb, xq] : counts_->row(query)) {
        for (const auto& [c, xc] : counts_->row(nb)) {
            if (c == query) continue;
            if (dots[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
            dots[static_cast<std::size_t>(c)] += xq * xc;
        }
    }
}

void CoCountsScorer::score_many(TokenIndex query, std::span<const TokenIndex> candidates,
                                std::span<double> out) const {
    const auto n = static_cast<TokenIndex>(counts_->size());
    if (similarity_ != CoCountSimilarity::kRowCosine || query >= n || counts_->row_norm(query) == 0.0) {
        Scorer::score_many(query, candidates, out);
        return;
    }
    thread_local std::vector<double> dots;
    thread_local std::vector<TokenIndex> touched;
    two_hop_dots(query, dots, touched);
    const double nq = counts_->row_norm(query);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const TokenIndex c = candidates[i];
        if (c >= n || c == query || counts_->row_norm(c) == 0.0) {
            out[i] = 0.0;
        } else {
            out[i] = dots[static_cast<std::size_t>(c)] / (nq * counts_->row_norm(c));
        }
    }
}

std::vector<ScoredItem> CoCountsScorer::top_k(TokenIndex query, std::size_t k) const {
    check_query(query);
    if (k < 1) throw Error("K must be >= 1");
    const auto n = static_cast<TokenIndex>(counts_->size());
    std::vector<ScoredItem> scored;
    if (query < n) {
        if (similarity_ == CoCountSimilarity::kNormalizedCount) {
            for (const auto& [c, x] : counts_->row(query)) {
                const double s = score(query, c);
                if (s > 0.0) scored.push_back({c, s});
            }
        } else if (counts_->row_norm(query) > 0.0) {
            // Only items sharing a neighbour with the query can score above zero.
            thread_local std::vector<double> dots;
            thread_local std::vector<TokenIndex> touched;
            two_hop_dots(query, dots, touched);
            const double nq = counts_->row_norm(query);
            scored.reserve(touched.size());
            for (TokenIndex c : touched) {
                const double d = dots[static_cast<std::size_t>(c)];
                if (d > 0.0) scored.push_back({c, d / (nq * counts_->row_norm(c))});
            }
        }
    }
    std::vector<ScoredItem> top = select_top(std::move(scored), k);
    // Pad with zero-score candidates in index order.
    if (top.size() < k) {
        std::vector<bool> taken(vocabulary().size(), false);
        for (const auto& s : top) taken[static_cast<std::size_t>(s.item)] = true;
        for (TokenIndex c : candidates()) {
            if (top.size() == k) break;
            if (c == query || taken[static_cast<std::size_t>(c)]) continue;
            top.push_back({c, 0.0});
        }
    }
    return top;
}

EmbeddingScorer::EmbeddingScorer(const Vocabulary& vocab, const EmbeddingModel& model, std::string name,
                                 TableSelection table)
    : Scorer(vocab), name_(std::move(name)),
      dim_(table == TableSelection::kBoth ? 2 * model.dim() : model.dim()) {
    if (model.rows() != vocab.size()) {
        throw Error("embedding scorer: model has " + std::to_string(model.rows()) + " rows, vocabulary " +
                    std::to_string(vocab.size()));
    }
    if (table == TableSelection::kBoth) {
        // Each row is the input vector followed by the output vector.
        rows_.reserve(model.rows() * dim_);
        for (std::size_t i = 0; i < model.rows(); ++i) {
            const auto in = model.input(static_cast<TokenIndex>(i));
            const auto out = model.output(static_cast<TokenIndex>(i));
            rows_.insert(rows_.end(), in.begin(), in.end());
            rows_.insert(rows_.end(), out.begin(), out.end());
        }
    } else {
        const auto source = table == TableSelection::kInput ? model.input_table() : model.output_table();
        rows_.assign(source.begin(), source.end());
    }
    squared_norms_.resize(model.rows());
    for (std::size_t i = 0; i < model.rows(); ++i) {
        double sq = 0.0;
        for (double v : row(static_cast<TokenIndex>(i))) sq += v * v;
        squared_norms_[i] = sq;
    }
}

double EmbeddingScorer::score(TokenIndex query, TokenIndex candidate) const {
    if (query < 0 || candidate < 0 || static_cast<std::size_t>(query) >= squared_norms_.size() ||
        static_cast<std::size_t>(candidate) >= squared_norms_.size()) {
        throw Error("embedding scorer: index out of range");
    }
    return cosine_rows(query, candidate);
}

void EmbeddingScorer::score_many(TokenIndex query, std::span<const TokenIndex> candidates,
                                 std::span<double> out) const {
    check_query(query);
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = cosine_rows(query, candidates[i]);
}

std::vector<ScoredItem> EmbeddingScorer::top_k(TokenIndex query, std::size_t k) const {
    check_query(query);
    if (k < 1) throw Error("K must be >= 1");
    std::vector<ScoredItem> scored;
    scored.reserve(candidates().size());
    for (TokenIndex c : candidates())
        if (c != query) scored.push_back({c, cosine_rows(query, c)});
    return select_top(std::move(scored), k);
}

MixScorer::MixScorer(double alpha, const Scorer& a, const Scorer& b, std::size_t pool_size, std::string name)
    : Scorer(a.vocabulary()), alpha_(alpha), a_(&a), b_(&b), pool_size_(pool_size), name_(std::move(name)) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("mix alpha must lie in [0, 1]");
    if (pool_size < 1) throw Error("mix candidate pool must be >= 1");
    if (a.vocabulary().size() != b.vocabulary().size() || a.candidates().size() != b.candidates().size()) {
        throw Error("mix components must share one vocabulary");
    }
    if (name_.empty()) name_ = "Mix(" + a.name() + "," + b.name() + ")";
}

double MixScorer::score(TokenIndex query, TokenIndex candidate) const {
    return alpha_ * a_->score(query, candidate) + (1.0 - alpha_) * b_->score(query, candidate);
}

std::vector<ScoredItem> MixScorer::top_k(TokenIndex query, std::size_t k) const {
    check_query(query);
    if (k < 1) throw Error("K must be >= 1");
    std::vector<TokenIndex> pool;
    for (const auto& s : a_->top_k(query, pool_size_)) pool.push_back(s.item);
    for (const auto& s : b_->top_k(query, pool_size_)) pool.push_back(s.item);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    std::vector<double> sa(pool.size()), sb(pool.size());
    a_->score_many(query, pool, sa);
    b_->score_many(query, pool, sb);
    std::vector<ScoredItem> scored;
    scored.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) scored.push_back({pool[i], alpha_ * sa[i] + (1.0 - alpha_) * sb[i]});
    return select_top(std::move(scored), k);
}

std::vector<ScoredItem> mix_top_k(double alpha, const Scorer& embedding, const Scorer& cocounts,
                                  TokenIndex query, std::size_t k, std::size_t pool_size) {
    return MixScorer(alpha, embedding, cocounts, pool_size).top_k(query, k);
}

}  // namespace mp2v
