#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace mp2v::synthetic {
namespace {

std::string item_name(std::size_t category, std::size_t rank) {
    return "i" + std::to_string(category) + "_" + std::to_string(rank);
}

}  // namespace

Corpus generate(const Options& o) {
    std::mt19937_64 rng(o.seed);
    auto rank_distribution = [&](double exponent) {
        std::vector<double> weights(o.items_per_category);
        for (std::size_t r = 0; r < weights.size(); ++r) weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        return std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    };
    auto pick_rank = rank_distribution(o.zipf_exponent);
    auto pick_target_rank = rank_distribution(o.target_zipf_exponent);
    std::uniform_int_distribution<std::size_t> pick_category(0, o.categories - 1);
    std::uniform_int_distribution<std::size_t> pick_length(o.min_length, o.max_length);
    std::bernoulli_distribution stay(o.stay_probability);
    std::bernoulli_distribution forward(0.5);

    auto next_category = [&](std::size_t c) {
        if (stay(rng)) return c;
        return forward(rng) ? (c + 1) % o.categories : (c + o.categories - 1) % o.categories;
    };
    auto encode = [&](std::size_t c, std::size_t r) { return c * o.items_per_category + r; };

    // Tuning-phase training prefixes: everything but the last two items.
    std::vector<std::vector<std::size_t>> prefixes(o.sessions);
    for (auto& prefix : prefixes) {
        const std::size_t length = pick_length(rng);
        std::size_t c = pick_category(rng);
        for (std::size_t p = 0; p + 2 < length; ++p) {
            if (p > 0) c = next_category(c);
            prefix.push_back(encode(c, pick_rank(rng)));
        }
    }

    using PairSet = std::set<std::pair<std::size_t, std::size_t>>;
    auto cooccurring = [&] {
        PairSet seen;
        for (const auto& prefix : prefixes)
            for (std::size_t p = 0; p < prefix.size(); ++p)
                for (std::size_t q = p + 1; q < prefix.size() && q <= p + static_cast<std::size_t>(o.window); ++q) {
                    seen.emplace(prefix[p], prefix[q]);
                    seen.emplace(prefix[q], prefix[p]);
                }
        return seen;
    };
    // Appends one item per session following the category dynamics; with
    // cold targets the item never co-occurs with the query in `seen`.
    auto extend = [&](const PairSet& seen) {
        for (auto& prefix : prefixes) {
            const std::size_t query = prefix.back();
            std::size_t target = query;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const std::size_t c = next_category(query / o.items_per_category);
                const std::size_t candidate = encode(c, pick_target_rank(rng));
                if (candidate == query) continue;
                if (o.cold_targets && seen.contains({query, candidate})) continue;
                target = candidate;
                break;
            }
            prefix.push_back(target);
        }
    };
    extend(o.cold_targets ? cooccurring() : PairSet{});  // validation item
    extend(o.cold_targets ? cooccurring() : PairSet{});  // test item

    Corpus corpus;
    corpus.sessions.reserve(o.sessions);
    for (std::size_t s = 0; s < o.sessions; ++s) {
        Session session;
        session.user = "u" + std::to_string(s);
        for (std::size_t code : prefixes[s])
            session.items.push_back(item_name(code / o.items_per_category, code % o.items_per_category));
        corpus.sessions.push_back(std::move(session));
    }
    for (std::size_t c = 0; c < o.categories; ++c)
        for (std::size_t r = 0; r < o.items_per_category; ++r)
            corpus.categories.insert(item_name(c, r), "c" + std::to_string(c));
    return corpus;
}

std::string to_sessions_tsv(const std::vector<Session>& sessions) {
    std::ostringstream out;
    for (const auto& s : sessions) {
        out << s.user << '\t';
        for (std::size_t i = 0; i < s.items.size(); ++i) out << (i ? " " : "") << s.items[i];
        out << '\n';
    }
    return out.str();
}

std::string to_metadata_tsv(const MetadataMap& map, const std::vector<Session>& sessions) {
    std::set<std::string> items;
    for (const auto& s : sessions) items.insert(s.items.begin(), s.items.end());
    std::ostringstream out;
    const std::size_t prefix = map.name().size() + 1;
    for (const auto& item : items)
        if (const std::string* value = map.find(item)) out << item << '\t' << value->substr(prefix) << '\n';
    return out.str();
}

}  // namespace mp2v::synthetic
