#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mp2v/corpus.hpp"

namespace mp2v {

struct SpmiEntry {
    TokenIndex column;
    double count;  // X_ij
    double pmi;
};

/// Shifted PMI of windowed co-occurrences. X_ij counts (target, context)
/// position pairs at distance 1..window, so X is symmetric and includes
/// repeats of the same token. X_i is the row marginal and |D| the total.
/// Only pairs with X_ij > 0 are stored.
class SpmiMatrix {
public:
    SpmiMatrix(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window, double shift_k);

    std::size_t size() const noexcept { return rows_.size(); }
    double shift() const noexcept { return shift_; }
    double total() const noexcept { return total_; }
    double marginal(TokenIndex i) const { return marginals_.at(static_cast<std::size_t>(i)); }
    std::span<const SpmiEntry> row(TokenIndex i) const { return rows_.at(static_cast<std::size_t>(i)); }

    /// Entry for (i, j), nullptr when X_ij = 0.
    const SpmiEntry* find(TokenIndex i, TokenIndex j) const;
    /// PMI - log(shift_k). Throws when X_ij = 0.
    double spmi(TokenIndex i, TokenIndex j) const;
    double pmi(TokenIndex i, TokenIndex j) const;
    std::size_t nonzeros() const;

private:
    double shift_;
    double log_shift_;
    double total_ = 0.0;
    std::vector<double> marginals_;
    std::vector<std::vector<SpmiEntry>> rows_;
};

inline SpmiMatrix compute_spmi(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window,
                               double shift_k) {
    return SpmiMatrix(size, sequences, window, shift_k);
}

}  // namespace mp2v
