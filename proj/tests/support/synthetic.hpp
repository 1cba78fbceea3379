#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mp2v/corpus.hpp"

namespace mp2v::synthetic {

/// Sessions drawn from latent categories. Each category owns a block of
/// items with Zipf popularity (exponent 0 is flat); the next item's category stays the same or
/// moves to a neighbouring category. With cold targets, the validation item
/// (second to last) never co-occurs with its query within `window` in the
/// tuning-phase training prefixes, and the test item never co-occurs with
/// its query in the final-phase prefixes.
struct Options {
    std::size_t sessions = 10000;
    std::size_t categories = 20;
    std::size_t items_per_category = 1000;
    std::size_t min_length = 5;
    std::size_t max_length = 12;
    double stay_probability = 0.8;
    double zipf_exponent = 0.0;
    // Popularity skew of held-out targets within their category; 0 is uniform.
    double target_zipf_exponent = 0.0;
    int window = 3;
    bool cold_targets = true;
    std::uint64_t seed = 1;
};

struct Corpus {
    std::vector<Session> sessions;
    MetadataMap categories{"category"};
};

Corpus generate(const Options& options);

std::string to_sessions_tsv(const std::vector<Session>& sessions);
std::string to_metadata_tsv(const MetadataMap& map, const std::vector<Session>& sessions);

}  // namespace mp2v::synthetic
