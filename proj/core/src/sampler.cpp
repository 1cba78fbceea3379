#include "mp2v/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "mp2v/error.hpp"

namespace mp2v {

NegativeSampler::NegativeSampler(std::span<const std::int64_t> frequencies, double power) {
    if (!(power >= 0.0)) throw Error("sampling power must be >= 0");
    const std::size_t n = frequencies.size();
    target_.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (frequencies[i] < 0) throw Error("negative token frequency");
        target_[i] = frequencies[i] > 0 ? std::pow(static_cast<double>(frequencies[i]), power) : 0.0;
        total += target_[i];
    }
    if (!(total > 0.0)) throw Error("negative sampler: total frequency is zero");
    for (double& p : target_) p /= total;

    // Vose's alias method.
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = target_[i] * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const std::size_t s = small.back();
        small.pop_back();
        const std::size_t l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = static_cast<TokenIndex>(l);
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    // Leftovers in `small` are rounding residue. Zero-mass ones are routed to
    // the heaviest token.
    if (!small.empty()) {
        const auto heaviest = static_cast<TokenIndex>(
            std::max_element(target_.begin(), target_.end()) - target_.begin());
        for (std::size_t i : small) {
            prob_[i] = target_[i] > 0.0 ? 1.0 : 0.0;
            alias_[i] = heaviest;
        }
    }
}

TokenIndex NegativeSampler::draw(Rng& rng) const {
    const std::uint64_t bits = rng();
    const std::size_t column = static_cast<std::size_t>(bits % prob_.size());
    // 53 uniform bits from a second draw for the coin.
    const double coin = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return coin < prob_[column] ? static_cast<TokenIndex>(column) : alias_[column];
}

void NegativeSampler::sample(std::size_t k, TokenIndex excluded, Rng& rng,
                             std::vector<TokenIndex>& out) const {
    if (k < 1) throw Error("k must be >= 1");
    if (prob_.size() < 2) throw Error("cannot sample negatives from a vocabulary of size 1");
    if (excluded >= 0 && static_cast<std::size_t>(excluded) < target_.size() &&
        target_[static_cast<std::size_t>(excluded)] >= 1.0) {
        throw Error("cannot sample negatives: all mass is on the excluded token");
    }
    for (std::size_t drawn = 0; drawn < k;) {
        const TokenIndex t = draw(rng);
        if (t == excluded) continue;
        out.push_back(t);
        ++drawn;
    }
}

std::vector<TokenIndex> NegativeSampler::sample(std::size_t k, TokenIndex excluded, Rng& rng) const {
    std::vector<TokenIndex> out;
    out.reserve(k);
    sample(k, excluded, rng, out);
    return out;
}

}  // namespace mp2v
