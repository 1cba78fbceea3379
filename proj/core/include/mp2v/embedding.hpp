#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mp2v/corpus.hpp"

namespace mp2v {

/// Input (w_i) and output (w_j) vector tables, one row per vocabulary token.
/// Storage precision is a template parameter; arithmetic in the trainer is
/// always carried out in double.
template <typename Real>
class BasicEmbeddingModel {
public:
    using value_type = Real;

    BasicEmbeddingModel() = default;
    BasicEmbeddingModel(std::size_t rows, std::size_t dim)
        : rows_(rows), dim_(dim), input_(rows * dim, Real{0}), output_(rows * dim, Real{0}) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<Real> input(TokenIndex row) { return {input_.data() + offset(row), dim_}; }
    std::span<const Real> input(TokenIndex row) const { return {input_.data() + offset(row), dim_}; }
    std::span<Real> output(TokenIndex row) { return {output_.data() + offset(row), dim_}; }
    std::span<const Real> output(TokenIndex row) const { return {output_.data() + offset(row), dim_}; }

    std::vector<Real>& input_table() noexcept { return input_; }
    const std::vector<Real>& input_table() const noexcept { return input_; }
    std::vector<Real>& output_table() noexcept { return output_; }
    const std::vector<Real>& output_table() const noexcept { return output_; }

    bool all_finite() const;

    bool operator==(const BasicEmbeddingModel&) const = default;

private:
    std::size_t offset(TokenIndex row) const { return static_cast<std::size_t>(row) * dim_; }

    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<Real> input_;
    std::vector<Real> output_;
};

using EmbeddingModel = BasicEmbeddingModel<float>;
using EmbeddingModelF64 = BasicEmbeddingModel<double>;

/// word2vec initialization: input rows uniform in [-0.5/dim, 0.5/dim],
/// output rows zero. Deterministic in `seed`.
template <typename Real>
BasicEmbeddingModel<Real> init_model(std::size_t rows, std::size_t dim, std::uint64_t seed);

enum class TableSelection { kInput, kOutput, kBoth };

std::string_view to_string(TableSelection table);
TableSelection parse_table_selection(std::string_view text);

/// Text format: header `V D`, then `token v1 ... vD` per row. With kBoth each
/// row carries the D input values followed by the D output values.
/// Tokens must be non-empty and contain no whitespace.
template <typename Real>
void save_embeddings(const BasicEmbeddingModel<Real>& model, std::span<const std::string> tokens,
                     const std::filesystem::path& path, TableSelection which = TableSelection::kInput);

struct LoadedEmbeddings {
    std::vector<std::string> tokens;
    EmbeddingModel model;  // output table is zero unless the file carried both tables
    bool has_output = false;
};

/// Accepts rows of D values (input table only) or 2D values (both tables);
/// all rows must agree.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path);

}  // namespace mp2v
