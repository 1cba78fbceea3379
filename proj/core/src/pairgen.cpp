#include "mp2v/pairgen.hpp"

#include <algorithm>

#include "mp2v/error.hpp"

namespace mp2v {

std::string_view to_string(PairKind kind) {
    switch (kind) {
        case PairKind::kJI: return "JI";
        case PairKind::kJM: return "JM";
        case PairKind::kMI: return "MI";
        case PairKind::kMM: return "MM";
        case PairKind::kIM: return "IM";
    }
    return "?";
}

std::optional<PairKind> parse_pair_kind(std::string_view text) {
    for (PairKind k : kAllPairKinds)
        if (to_string(k) == text) return k;
    return std::nullopt;
}

void generate_pairs(std::span<const TokenIndex> items, const MetadataIndex& metadata, int window,
                    KindSet kinds, std::vector<TrainingPair>& out) {
    if (window < 1) throw Error("window must be >= 1");
    const auto n = static_cast<std::ptrdiff_t>(items.size());
    const std::size_t attributes = metadata.attributes();
    const bool side = kinds.has_side_information() && attributes > 0;

    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const TokenIndex item_i = items[static_cast<std::size_t>(i)];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const TokenIndex item_j = items[static_cast<std::size_t>(j)];
            if (kinds.contains(PairKind::kJI)) out.push_back({item_i, item_j, PairKind::kJI});
            if (!side) continue;
            for (std::size_t a = 0; a < attributes; ++a) {
                const TokenIndex meta_i = metadata.get(item_i, a);
                const TokenIndex meta_j = metadata.get(item_j, a);
                if (meta_i != kNoToken && kinds.contains(PairKind::kJM))
                    out.push_back({meta_i, item_j, PairKind::kJM});
                if (meta_j != kNoToken && kinds.contains(PairKind::kMI))
                    out.push_back({item_i, meta_j, PairKind::kMI});
                if (meta_i != kNoToken && meta_j != kNoToken && kinds.contains(PairKind::kMM))
                    out.push_back({meta_i, meta_j, PairKind::kMM});
            }
        }
        if (side && kinds.contains(PairKind::kIM)) {
            for (std::size_t a = 0; a < attributes; ++a) {
                const TokenIndex meta_i = metadata.get(item_i, a);
                if (meta_i != kNoToken) out.push_back({meta_i, item_i, PairKind::kIM});
            }
        }
    }
}

std::vector<TrainingPair> generate_pairs(std::span<const TokenIndex> items,
                                         const MetadataIndex& metadata, int window, KindSet kinds) {
    std::vector<TrainingPair> out;
    generate_pairs(items, metadata, window, kinds, out);
    return out;
}

std::uint64_t count_pairs(std::span<const TokenIndex> items, const MetadataIndex& metadata,
                          int window, KindSet kinds) {
    if (window < 1) throw Error("window must be >= 1");
    const auto n = static_cast<std::ptrdiff_t>(items.size());
    const std::size_t attributes = metadata.attributes();
    const bool side = kinds.has_side_information() && attributes > 0;
    std::uint64_t total = 0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const TokenIndex item_i = items[static_cast<std::size_t>(i)];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
        const auto contexts = static_cast<std::uint64_t>(hi - lo);
        if (kinds.contains(PairKind::kJI)) total += contexts;
        if (!side) continue;
        for (std::size_t a = 0; a < attributes; ++a) {
            const bool has_i = metadata.get(item_i, a) != kNoToken;
            if (has_i && kinds.contains(PairKind::kJM)) total += contexts;
            if (has_i && kinds.contains(PairKind::kIM)) ++total;
            if (!kinds.contains(PairKind::kMI) && !(has_i && kinds.contains(PairKind::kMM))) continue;
            for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                if (j == i) continue;
                if (metadata.get(items[static_cast<std::size_t>(j)], a) == kNoToken) continue;
                if (kinds.contains(PairKind::kMI)) ++total;
                if (has_i && kinds.contains(PairKind::kMM)) ++total;
            }
        }
    }
    return total;
}

}  // namespace mp2v
