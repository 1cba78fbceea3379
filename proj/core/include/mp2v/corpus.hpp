#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mp2v {

using TokenIndex = std::int32_t;
inline constexpr TokenIndex kNoToken = -1;

/// One line of the sessions file: an opaque user id and its time-ordered items.
struct Session {
    std::string user;
    std::vector<std::string> items;
};

/// Single categorical attribute per item (e.g. artist). Stored values carry
/// the `name:` prefix so they never collide with item ids.
class MetadataMap {
public:
    explicit MetadataMap(std::string name);

    const std::string& name() const noexcept { return name_; }

    /// Inserts `item -> name:value`. Re-inserting the same value is a no-op;
    /// a conflicting value throws.
    void insert(const std::string& item, std::string_view value);

    /// Prefixed metadata token for `item`, or nullptr when the item has none.
    const std::string* find(const std::string& item) const;

    std::string prefixed(std::string_view value) const;

    std::size_t size() const noexcept { return values_.size(); }

private:
    std::string name_;
    std::unordered_map<std::string, std::string> values_;
};

std::vector<Session> load_sessions(const std::filesystem::path& path);
std::vector<Session> parse_sessions(std::string_view text, const std::string& source = "<memory>");
MetadataMap load_metadata(const std::filesystem::path& path, std::string name = "artist");

/// Dense bijective token <-> index map over the union of items and metadata
/// values. Item tokens always occupy indices [0, item_count()), ordered by
/// descending frequency then token; metadata tokens follow.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Items must precede metadata tokens; throws on duplicates.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> freqs,
               std::vector<bool> is_metadata);

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t item_count() const noexcept { return item_count_; }

    TokenIndex find(std::string_view token) const;
    /// Throws UnknownTokenError.
    TokenIndex index_of(std::string_view token) const;
    const std::string& token_of(TokenIndex index) const { return tokens_.at(static_cast<std::size_t>(index)); }

    std::int64_t frequency(TokenIndex index) const { return freqs_.at(static_cast<std::size_t>(index)); }
    std::span<const std::int64_t> frequencies() const noexcept { return freqs_; }
    bool is_metadata(TokenIndex index) const { return is_meta_.at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

private:

    std::vector<std::string> tokens_;
    std::vector<std::int64_t> freqs_;
    std::vector<bool> is_meta_;
    std::unordered_map<std::string, TokenIndex> lookup_;
    std::size_t item_count_ = 0;
};

/// Items with frequency >= min_count plus every metadata token of a surviving
/// item (metadata is exempt from min_count). Metadata frequency counts the
/// training positions whose item carries that value.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences,
                            std::span<const MetadataMap> metadata, std::int64_t min_count,
                            bool include_metadata = true);

enum class Phase { kTuning, kFinal };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

/// Leave-last-out split. In the tuning phase the (n-1)-th item is the
/// validation target and the n-th item is held out; in the final phase the
/// validation item joins the training prefix and the n-th item is the target.
struct SplitCorpus {
    Phase phase = Phase::kFinal;
    std::vector<std::string> users;
    std::vector<std::vector<std::string>> train;
    std::vector<std::string> validation;  // empty in the final phase
    std::vector<std::string> test;
    std::size_t excluded = 0;  // sessions shorter than 3 items

    /// Evaluation targets for this phase.
    const std::vector<std::string>& targets() const { return phase == Phase::kTuning ? validation : test; }
};

SplitCorpus split_sessions(std::span<const Session> sessions, Phase phase);

/// Per-item metadata token indices, one column per attribute (kNoToken if missing).
class MetadataIndex {
public:
    MetadataIndex() = default;
    MetadataIndex(std::size_t item_count, std::size_t attributes);

    std::size_t attributes() const noexcept { return attributes_; }
    std::size_t item_count() const noexcept { return attributes_ ? table_.size() / attributes_ : 0; }

    TokenIndex get(TokenIndex item, std::size_t attribute) const {
        if (attributes_ == 0) return kNoToken;
        return table_[static_cast<std::size_t>(item) * attributes_ + attribute];
    }
    void set(TokenIndex item, std::size_t attribute, TokenIndex meta) {
        table_[static_cast<std::size_t>(item) * attributes_ + attribute] = meta;
    }

private:
    std::size_t attributes_ = 0;
    std::vector<TokenIndex> table_;
};

/// Training sequences encoded against a vocabulary. Out-of-vocabulary items
/// are removed and the remaining positions closed up; emptied sequences are dropped.
struct TrainingCorpus {
    Vocabulary vocab;
    std::vector<std::vector<TokenIndex>> sequences;
    MetadataIndex metadata;
};

TrainingCorpus encode_corpus(const std::vector<std::vector<std::string>>& sequences,
                             std::span<const MetadataMap> metadata, std::int64_t min_count,
                             bool include_metadata = true);

/// Encodes sequences against an existing vocabulary (same gap-closing rule).
std::vector<std::vector<TokenIndex>> encode_sequences(
    const std::vector<std::vector<std::string>>& sequences, const Vocabulary& vocab);

}  // namespace mp2v
