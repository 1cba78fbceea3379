#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mp2v/corpus.hpp"

namespace mp2v {

/// The five interaction types. The letter before the bar is the output,
/// the one after it the input: JI predicts a context item from an item,
/// IM an item from its own metadata, JM a context item from metadata,
/// MI context metadata from an item, MM context metadata from metadata.
enum class PairKind : std::uint8_t { kJI = 0, kJM, kMI, kMM, kIM };

inline constexpr std::size_t kPairKindCount = 5;
inline constexpr std::array<PairKind, kPairKindCount> kAllPairKinds{
    PairKind::kJI, PairKind::kJM, PairKind::kMI, PairKind::kMM, PairKind::kIM};

std::string_view to_string(PairKind kind);
std::optional<PairKind> parse_pair_kind(std::string_view text);

/// Small bitset over PairKind.
class KindSet {
public:
    constexpr KindSet() = default;
    constexpr KindSet(std::initializer_list<PairKind> kinds) {
        for (PairKind k : kinds) insert(k);
    }

    static constexpr KindSet all() {
        return {PairKind::kJI, PairKind::kJM, PairKind::kMI, PairKind::kMM, PairKind::kIM};
    }
    static constexpr KindSet prod2vec() { return {PairKind::kJI}; }

    constexpr void insert(PairKind k) { bits_ |= bit(k); }
    constexpr void erase(PairKind k) { bits_ &= static_cast<std::uint8_t>(~bit(k)); }
    constexpr bool contains(PairKind k) const { return (bits_ & bit(k)) != 0; }
    constexpr bool has_side_information() const { return (bits_ & ~bit(PairKind::kJI)) != 0; }
    constexpr bool operator==(const KindSet&) const = default;

private:
    static constexpr std::uint8_t bit(PairKind k) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k)); }
    std::uint8_t bits_ = 0;
};

struct TrainingPair {
    TokenIndex input;
    TokenIndex output;
    PairKind kind;

    bool operator==(const TrainingPair&) const = default;
};

/// Expands one encoded sequence into training pairs with a fixed symmetric
/// window. For every position i and context position j (0 < |i-j| <= window,
/// ascending) emits JI, then per attribute JM, MI, MM where metadata exists;
/// after its contexts, position i emits one IM pair per attribute.
/// Pairs are appended to `out`.
void generate_pairs(std::span<const TokenIndex> items, const MetadataIndex& metadata, int window,
                    KindSet kinds, std::vector<TrainingPair>& out);

std::vector<TrainingPair> generate_pairs(std::span<const TokenIndex> items,
                                         const MetadataIndex& metadata, int window, KindSet kinds);

/// Number of pairs generate_pairs would emit, without materializing them.
std::uint64_t count_pairs(std::span<const TokenIndex> items, const MetadataIndex& metadata,
                          int window, KindSet kinds);

}  // namespace mp2v
