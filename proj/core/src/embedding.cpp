#include "mp2v/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mp2v/error.hpp"

namespace mp2v {

template <typename Real>
bool BasicEmbeddingModel<Real>::all_finite() const {
    for (Real v : input_)
        if (!std::isfinite(v)) return false;
    for (Real v : output_)
        if (!std::isfinite(v)) return false;
    return true;
}

template <typename Real>
BasicEmbeddingModel<Real> init_model(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    if (dim < 1) throw Error("embedding dimension must be >= 1");
    BasicEmbeddingModel<Real> model(rows, dim);
    std::mt19937_64 rng(seed);
    const double half_width = 0.5 / static_cast<double>(dim);
    for (Real& v : model.input_table()) {
        // 53-bit uniform in [0, 1), mapped to [-half_width, half_width).
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = static_cast<Real>((2.0 * u - 1.0) * half_width);
    }
    return model;
}

std::string_view to_string(TableSelection table) {
    switch (table) {
        case TableSelection::kInput: return "input";
        case TableSelection::kOutput: return "output";
        case TableSelection::kBoth: return "both";
    }
    return "?";
}

TableSelection parse_table_selection(std::string_view text) {
    if (text == "input") return TableSelection::kInput;
    if (text == "output") return TableSelection::kOutput;
    if (text == "both") return TableSelection::kBoth;
    throw Error("unknown table selection '" + std::string(text) + "'");
}

namespace {

template <typename Real>
void append_number(std::string& line, Real value) {
    char buffer[64];
    // Shortest representation that round-trips the stored precision.
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) throw Error("failed to format embedding value");
    line.push_back(' ');
    line.append(buffer, end);
}

bool valid_token(const std::string& token) {
    if (token.empty()) return false;
    for (char c : token)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    return true;
}

}  // namespace

template <typename Real>
void save_embeddings(const BasicEmbeddingModel<Real>& model, std::span<const std::string> tokens,
                     const std::filesystem::path& path, TableSelection which) {
    if (tokens.size() != model.rows()) {
        throw Error("save_embeddings: " + std::to_string(tokens.size()) + " tokens for " +
                    std::to_string(model.rows()) + " rows");
    }
    for (const auto& t : tokens)
        if (!valid_token(t)) throw Error("save_embeddings: token '" + t + "' is empty or contains whitespace");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << model.rows() << ' ' << model.dim() << '\n';
    std::string line;
    for (std::size_t r = 0; r < model.rows(); ++r) {
        const auto row = static_cast<TokenIndex>(r);
        line.assign(tokens[r]);
        if (which != TableSelection::kOutput)
            for (Real v : model.input(row)) append_number(line, v);
        if (which != TableSelection::kInput)
            for (Real v : model.output(row)) append_number(line, v);
        line.push_back('\n');
        out << line;
    }
    if (!out) throw Error("write failed for " + path.string());
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    const std::string source = path.string();

    std::string line;
    if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
    std::istringstream header(line);
    long long rows = -1, dim = -1;
    if (!(header >> rows >> dim) || rows < 0 || dim < 1) throw ParseError(source, 1, "header must be 'V D'");

    LoadedEmbeddings loaded;
    loaded.model = EmbeddingModel(static_cast<std::size_t>(rows), static_cast<std::size_t>(dim));
    loaded.tokens.reserve(static_cast<std::size_t>(rows));
    std::size_t width = 0;
    std::vector<float> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (loaded.tokens.size() == static_cast<std::size_t>(rows)) {
            throw ParseError(source, line_no, "header declares " + std::to_string(rows) + " rows but file has more");
        }
        const char* p = line.data();
        const char* end = line.data() + line.size();
        const char* token_end = p;
        while (token_end != end && *token_end != ' ') ++token_end;
        loaded.tokens.emplace_back(p, token_end);
        values.clear();
        p = token_end;
        while (p != end) {
            while (p != end && *p == ' ') ++p;
            if (p == end) break;
            float v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{}) throw ParseError(source, line_no, "invalid number");
            values.push_back(v);
            p = next;
        }
        if (width == 0) {
            width = values.size();
            if (width != static_cast<std::size_t>(dim) && width != 2 * static_cast<std::size_t>(dim)) {
                throw ParseError(source, line_no, "expected " + std::to_string(dim) + " values, got " +
                                                      std::to_string(values.size()));
            }
            loaded.has_output = width == 2 * static_cast<std::size_t>(dim);
        } else if (values.size() != width) {
            throw ParseError(source, line_no, "expected " + std::to_string(width) + " values, got " +
                                                  std::to_string(values.size()));
        }
        const auto row = static_cast<TokenIndex>(loaded.tokens.size() - 1);
        auto in_row = loaded.model.input(row);
        std::copy_n(values.begin(), dim, in_row.begin());
        if (loaded.has_output) {
            auto out_row = loaded.model.output(row);
            std::copy_n(values.begin() + dim, dim, out_row.begin());
        }
    }
    if (loaded.tokens.size() != static_cast<std::size_t>(rows)) {
        throw ParseError(source, 0, "header declares " + std::to_string(rows) + " rows but file has " +
                                        std::to_string(loaded.tokens.size()));
    }
    return loaded;
}

template class BasicEmbeddingModel<float>;
template class BasicEmbeddingModel<double>;
template BasicEmbeddingModel<float> init_model<float>(std::size_t, std::size_t, std::uint64_t);
template BasicEmbeddingModel<double> init_model<double>(std::size_t, std::size_t, std::uint64_t);
template void save_embeddings<float>(const BasicEmbeddingModel<float>&, std::span<const std::string>,
                                     const std::filesystem::path&, TableSelection);
template void save_embeddings<double>(const BasicEmbeddingModel<double>&, std::span<const std::string>,
                                      const std::filesystem::path&, TableSelection);

}  // namespace mp2v
