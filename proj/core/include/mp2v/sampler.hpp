#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mp2v/corpus.hpp"

namespace mp2v {

using Rng = std::mt19937_64;

/// Draws vocabulary indices with probability proportional to freq^power
/// (Walker/Vose alias table, exact up to floating-point rounding).
/// Immutable after construction; callers own their Rng.
class NegativeSampler {
public:
    NegativeSampler(std::span<const std::int64_t> frequencies, double power);

    std::size_t size() const noexcept { return prob_.size(); }

    /// Target probability of `index` (what the alias table encodes).
    double probability(TokenIndex index) const { return target_.at(static_cast<std::size_t>(index)); }

    TokenIndex draw(Rng& rng) const;

    /// k i.i.d. draws, redrawing any that equal `excluded`. Appends to `out`.
    void sample(std::size_t k, TokenIndex excluded, Rng& rng, std::vector<TokenIndex>& out) const;
    std::vector<TokenIndex> sample(std::size_t k, TokenIndex excluded, Rng& rng) const;

private:
    std::vector<double> prob_;
    std::vector<TokenIndex> alias_;
    std::vector<double> target_;
};

inline NegativeSampler build_negative_sampler(const Vocabulary& vocab, double power) {
    return NegativeSampler(vocab.frequencies(), power);
}

}  // namespace mp2v
