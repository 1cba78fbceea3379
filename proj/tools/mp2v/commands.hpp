#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "mp2v/pipeline.hpp"

namespace mp2v::cli {

// Output layout under RunConfig::out.
std::filesystem::path phase_dir(const RunConfig& config, Mode mode, Phase phase);
std::filesystem::path reports_dir(const RunConfig& config);
std::filesystem::path ablation_dir(const RunConfig& config);

int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_ablate(const RunConfig& config);

struct NnRequest {
    std::filesystem::path embeddings;
    std::optional<std::filesystem::path> vocab;  // default: vocab.tsv next to the embeddings
    std::string query;
    std::size_t k = 10;
    std::optional<TableSelection> table;  // default: both when the file has output vectors
};

int cmd_nn(const NnRequest& request);

}  // namespace mp2v::cli
