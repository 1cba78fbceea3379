#include "mp2v/spmi.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mp2v/error.hpp"

namespace mp2v {

SpmiMatrix::SpmiMatrix(std::size_t size, std::span<const std::vector<TokenIndex>> sequences, int window,
                       double shift_k)
    : shift_(shift_k), marginals_(size, 0.0), rows_(size) {
    if (window < 1) throw Error("window must be >= 1");
    if (!(shift_k >= 1.0)) throw Error("SPMI shift k must be >= 1");
    log_shift_ = std::log(shift_k);

    std::vector<std::map<TokenIndex, double>> counts(size);
    for (const auto& seq : sequences) {
        const std::size_t n = seq.size();
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t last = std::min(n - 1, p + static_cast<std::size_t>(window));
            for (std::size_t q = p + 1; q <= last; ++q) {
                const TokenIndex a = seq[p], b = seq[q];
                if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= size || static_cast<std::size_t>(b) >= size) {
                    throw Error("SPMI: token index out of range");
                }
                counts[static_cast<std::size_t>(a)][b] += 1.0;
                counts[static_cast<std::size_t>(b)][a] += 1.0;
            }
        }
    }
    for (std::size_t i = 0; i < size; ++i) {
        for (const auto& [j, c] : counts[i]) marginals_[i] += c;
        total_ += marginals_[i];
    }
    for (std::size_t i = 0; i < size; ++i) {
        rows_[i].reserve(counts[i].size());
        for (const auto& [j, c] : counts[i]) {
            const double pmi = std::log(c * total_ / (marginals_[i] * marginals_[static_cast<std::size_t>(j)]));
            rows_[i].push_back({j, c, pmi});
        }
    }
}

const SpmiEntry* SpmiMatrix::find(TokenIndex i, TokenIndex j) const {
    const auto r = row(i);
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const SpmiEntry& e, TokenIndex col) { return e.column < col; });
    return it != r.end() && it->column == j ? &*it : nullptr;
}

double SpmiMatrix::pmi(TokenIndex i, TokenIndex j) const {
    const SpmiEntry* e = find(i, j);
    if (!e) throw Error("PMI undefined: pair never co-occurs");
    return e->pmi;
}

double SpmiMatrix::spmi(TokenIndex i, TokenIndex j) const { return pmi(i, j) - log_shift_; }

std::size_t SpmiMatrix::nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
}

}  // namespace mp2v
