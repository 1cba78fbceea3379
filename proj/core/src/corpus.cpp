#include "mp2v/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mp2v/error.hpp"

namespace mp2v {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Calls fn(line_number, line) for every line, stripping a trailing CR.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(++line_no, line);
        start = end + 1;
    }
}

void split_whitespace(std::string_view text, std::vector<std::string>& out) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
}

struct TokenOrder {
    const std::vector<std::int64_t>& freq;
    const std::vector<std::string>& token;
    bool operator()(std::size_t a, std::size_t b) const {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return token[a] < token[b];
    }
};

}  // namespace

MetadataMap::MetadataMap(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw Error("metadata attribute name must not be empty");
}

std::string MetadataMap::prefixed(std::string_view value) const {
    std::string out;
    out.reserve(name_.size() + 1 + value.size());
    out.append(name_).push_back(':');
    out.append(value);
    return out;
}

void MetadataMap::insert(const std::string& item, std::string_view value) {
    std::string token = prefixed(value);
    auto [it, inserted] = values_.try_emplace(item, token);
    if (!inserted && it->second != token) {
        throw Error("conflicting " + name_ + " values for item '" + item + "': '" + it->second +
                    "' vs '" + token + "'");
    }
}

const std::string* MetadataMap::find(const std::string& item) const {
    auto it = values_.find(item);
    return it == values_.end() ? nullptr : &it->second;
}

std::vector<Session> parse_sessions(std::string_view text, const std::string& source) {
    std::vector<Session> sessions;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError(source, line_no, "expected user_id<TAB>items");
        if (tab == 0) throw ParseError(source, line_no, "empty user id");
        Session session;
        session.user = std::string(line.substr(0, tab));
        split_whitespace(line.substr(tab + 1), session.items);
        if (session.items.empty()) throw ParseError(source, line_no, "session has no items");
        sessions.push_back(std::move(session));
    });
    if (sessions.empty()) throw ParseError(source, 0, "no sessions");
    return sessions;
}

std::vector<Session> load_sessions(const std::filesystem::path& path) {
    return parse_sessions(read_file(path), path.string());
}

MetadataMap load_metadata(const std::filesystem::path& path, std::string name) {
    MetadataMap map(std::move(name));
    const std::string text = read_file(path);
    const std::string source = path.string();
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (line.empty()) return;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
            throw ParseError(source, line_no, "expected item_id<TAB>value");
        }
        map.insert(std::string(line.substr(0, tab)), line.substr(tab + 1));
    });
    return map;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> freqs,
                       std::vector<bool> is_metadata)
    : tokens_(std::move(tokens)), freqs_(std::move(freqs)), is_meta_(std::move(is_metadata)) {
    if (freqs_.size() != tokens_.size() || is_meta_.size() != tokens_.size()) {
        throw Error("vocabulary: mismatched column sizes");
    }
    lookup_.reserve(tokens_.size());
    item_count_ = 0;
    bool seen_meta = false;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!lookup_.emplace(tokens_[i], static_cast<TokenIndex>(i)).second) {
            throw Error("vocabulary: duplicate token '" + tokens_[i] + "'");
        }
        if (is_meta_[i]) {
            seen_meta = true;
        } else {
            if (seen_meta) throw Error("vocabulary: item token '" + tokens_[i] + "' after metadata");
            ++item_count_;
        }
    }
}

TokenIndex Vocabulary::find(std::string_view token) const {
    auto it = lookup_.find(std::string(token));
    return it == lookup_.end() ? kNoToken : it->second;
}

TokenIndex Vocabulary::index_of(std::string_view token) const {
    const TokenIndex index = find(token);
    if (index == kNoToken) throw UnknownTokenError(std::string(token));
    return index;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences,
                            std::span<const MetadataMap> metadata, std::int64_t min_count,
                            bool include_metadata) {
    if (min_count < 1) throw Error("min_count must be >= 1");

    std::unordered_map<std::string, std::int64_t> item_counts;
    for (const auto& seq : sequences)
        for (const auto& item : seq) ++item_counts[item];

    std::vector<std::string> items;
    std::vector<std::int64_t> item_freq;
    for (const auto& [token, count] : item_counts) {
        if (count >= min_count) {
            items.push_back(token);
            item_freq.push_back(count);
        }
    }
    if (items.empty()) throw Error("vocabulary is empty after min_count filtering");

    std::unordered_map<std::string, std::int64_t> meta_counts;
    if (include_metadata) {
        for (const auto& map : metadata) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (const std::string* value = map.find(items[i])) meta_counts[*value] += item_freq[i];
            }
        }
    }
    std::vector<std::string> metas;
    std::vector<std::int64_t> meta_freq;
    for (const auto& [token, count] : meta_counts) {
        if (item_counts.contains(token)) {
            throw Error("metadata token '" + token + "' collides with an item id");
        }
        metas.push_back(token);
        meta_freq.push_back(count);
    }

    auto sorted = [](std::vector<std::string>& tok, std::vector<std::int64_t>& freq) {
        std::vector<std::size_t> order(tok.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), TokenOrder{freq, tok});
        std::vector<std::string> t;
        std::vector<std::int64_t> f;
        t.reserve(order.size());
        f.reserve(order.size());
        for (std::size_t i : order) {
            t.push_back(std::move(tok[i]));
            f.push_back(freq[i]);
        }
        tok = std::move(t);
        freq = std::move(f);
    };
    sorted(items, item_freq);
    sorted(metas, meta_freq);

    std::vector<bool> is_meta(items.size(), false);
    is_meta.resize(items.size() + metas.size(), true);
    items.insert(items.end(), std::make_move_iterator(metas.begin()), std::make_move_iterator(metas.end()));
    item_freq.insert(item_freq.end(), meta_freq.begin(), meta_freq.end());
    return Vocabulary(std::move(items), std::move(item_freq), std::move(is_meta));
}

std::string_view to_string(Phase phase) {
    return phase == Phase::kTuning ? "tuning" : "final";
}

Phase parse_phase(std::string_view text) {
    if (text == "tuning") return Phase::kTuning;
    if (text == "final") return Phase::kFinal;
    throw Error("unknown phase '" + std::string(text) + "' (expected tuning or final)");
}

SplitCorpus split_sessions(std::span<const Session> sessions, Phase phase) {
    SplitCorpus split;
    split.phase = phase;
    for (const auto& session : sessions) {
        const auto& items = session.items;
        const std::size_t n = items.size();
        if (n < 3) {
            ++split.excluded;
            continue;
        }
        split.users.push_back(session.user);
        if (phase == Phase::kTuning) {
            split.train.emplace_back(items.begin(), items.end() - 2);
            split.validation.push_back(items[n - 2]);
        } else {
            split.train.emplace_back(items.begin(), items.end() - 1);
        }
        split.test.push_back(items[n - 1]);
    }
    return split;
}

MetadataIndex::MetadataIndex(std::size_t item_count, std::size_t attributes)
    : attributes_(attributes), table_(item_count * attributes, kNoToken) {}

std::vector<std::vector<TokenIndex>> encode_sequences(
    const std::vector<std::vector<std::string>>& sequences, const Vocabulary& vocab) {
    std::vector<std::vector<TokenIndex>> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) {
        std::vector<TokenIndex> encoded;
        encoded.reserve(seq.size());
        for (const auto& item : seq) {
            const TokenIndex index = vocab.find(item);
            if (index != kNoToken && !vocab.is_metadata(index)) encoded.push_back(index);
        }
        if (!encoded.empty()) out.push_back(std::move(encoded));
    }
    return out;
}

TrainingCorpus encode_corpus(const std::vector<std::vector<std::string>>& sequences,
                             std::span<const MetadataMap> metadata, std::int64_t min_count,
                             bool include_metadata) {
    TrainingCorpus corpus;
    corpus.vocab = build_vocabulary(sequences, metadata, min_count, include_metadata);
    corpus.sequences = encode_sequences(sequences, corpus.vocab);
    const std::size_t attributes = include_metadata ? metadata.size() : 0;
    corpus.metadata = MetadataIndex(corpus.vocab.item_count(), attributes);
    for (std::size_t a = 0; a < attributes; ++a) {
        for (std::size_t i = 0; i < corpus.vocab.item_count(); ++i) {
            const auto item = static_cast<TokenIndex>(i);
            if (const std::string* value = metadata[a].find(corpus.vocab.token_of(item))) {
                corpus.metadata.set(item, a, corpus.vocab.index_of(*value));
            }
        }
    }
    return corpus;
}

}  // namespace mp2v
