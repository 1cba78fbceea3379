#pragma once

// Independent reference computations used as test oracles. None of these
// call into the code paths they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "mp2v/embedding.hpp"
#include "mp2v/pairgen.hpp"

namespace mp2v::oracle {

/// Brute-force enumeration over every (position, position, kind) triple.
/// `meta[p]` is the metadata token at position p (kNoToken if none).
inline std::vector<TrainingPair> enumerate_pairs(const std::vector<TokenIndex>& items,
                                                 const std::vector<TokenIndex>& meta, int window, KindSet kinds) {
    std::vector<TrainingPair> out;
    const int n = static_cast<int>(items.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int d = i > j ? i - j : j - i;
            for (PairKind kind : kAllPairKinds) {
                if (!kinds.contains(kind)) continue;
                if (kind == PairKind::kIM) {
                    if (i == j && meta[i] != kNoToken) out.push_back({meta[i], items[i], kind});
                    continue;
                }
                if (d == 0 || d > window) continue;
                switch (kind) {
                    case PairKind::kJI: out.push_back({items[i], items[j], kind}); break;
                    case PairKind::kJM:
                        if (meta[i] != kNoToken) out.push_back({meta[i], items[j], kind});
                        break;
                    case PairKind::kMI:
                        if (meta[j] != kNoToken) out.push_back({items[i], meta[j], kind});
                        break;
                    case PairKind::kMM:
                        if (meta[i] != kNoToken && meta[j] != kNoToken) out.push_back({meta[i], meta[j], kind});
                        break;
                    default: break;
                }
            }
        }
    }
    return out;
}

inline auto pair_key(const TrainingPair& p) { return std::make_tuple(p.kind, p.input, p.output); }

inline std::vector<TrainingPair> sorted(std::vector<TrainingPair> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return pair_key(a) < pair_key(b); });
    return pairs;
}

/// Negative-sampling loss written directly from its definition.
template <typename Real>
double sgns_loss(const BasicEmbeddingModel<Real>& m, TokenIndex input, TokenIndex output,
                 const std::vector<TokenIndex>& negatives) {
    auto dot = [&](TokenIndex a, TokenIndex b) {
        long double s = 0;
        for (std::size_t d = 0; d < m.dim(); ++d) s += static_cast<long double>(m.input(a)[d]) * m.output(b)[d];
        return static_cast<double>(s);
    };
    auto log_sigmoid = [](double x) { return -std::log1p(std::exp(-x)); };
    double loss = -log_sigmoid(dot(input, output));
    for (TokenIndex n : negatives) loss -= log_sigmoid(-dot(input, n));
    return loss;
}

/// Central finite differences of sgns_loss with respect to every entry of
/// both tables. Returns {input gradient table, output gradient table}.
inline std::pair<std::vector<double>, std::vector<double>> finite_difference_gradient(
    BasicEmbeddingModel<double> m, TokenIndex input, TokenIndex output, const std::vector<TokenIndex>& negatives,
    double eps) {
    auto diff = [&](std::vector<double>& table) {
        std::vector<double> g(table.size());
        for (std::size_t e = 0; e < table.size(); ++e) {
            const double saved = table[e];
            table[e] = saved + eps;
            const double up = sgns_loss(m, input, output, negatives);
            table[e] = saved - eps;
            const double down = sgns_loss(m, input, output, negatives);
            table[e] = saved;
            g[e] = (up - down) / (2 * eps);
        }
        return g;
    };
    auto gin = diff(m.input_table());
    auto gout = diff(m.output_table());
    return {gin, gout};
}

/// Windowed co-occurrence counts by direct enumeration of position pairs.
/// `include_self` keeps pairs of identical tokens.
inline std::map<std::pair<TokenIndex, TokenIndex>, double> count_cooccurrences(
    const std::vector<std::vector<TokenIndex>>& sequences, int window, bool include_self) {
    std::map<std::pair<TokenIndex, TokenIndex>, double> counts;
    for (const auto& seq : sequences) {
        const int n = static_cast<int>(seq.size());
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                const int d = p > q ? p - q : q - p;
                if (d == 0 || d > window) continue;
                if (!include_self && seq[p] == seq[q]) continue;
                counts[{seq[p], seq[q]}] += 1.0;
            }
    }
    return counts;
}

}  // namespace mp2v::oracle
