#include <cmath>
#include <string>

#include "doctest.h"
#include "mp2v/embedding.hpp"
#include "mp2v/error.hpp"
#include "temp_dir.hpp"

using namespace mp2v;

TEST_SUITE("embedding") {

TEST_CASE("initialization follows the word2vec convention") {
    const auto m = init_model<float>(40, 50, 9);
    for (float v : m.input_table()) CHECK(std::abs(v) <= 0.01f);
    for (float v : m.output_table()) CHECK(v == 0.0f);
    CHECK(m == init_model<float>(40, 50, 9));
    CHECK_FALSE(m == init_model<float>(40, 50, 10));
    CHECK(m.all_finite());
    CHECK_THROWS_AS(init_model<float>(3, 0, 1), Error);
}

TEST_CASE("text round trip keeps every float") {
    TempDir dir;
    auto m = init_model<float>(2, 2, 3);
    m.output(0)[1] = 0.123456789f;
    const std::vector<std::string> tokens{"a", "artist:X"};
    const auto path = dir.path() / "e.txt";

    save_embeddings(m, tokens, path);
    const LoadedEmbeddings in = load_embeddings(path);
    CHECK(in.tokens == tokens);
    CHECK_FALSE(in.has_output);
    CHECK(in.model.input_table() == m.input_table());
    for (float v : in.model.output_table()) CHECK(v == 0.0f);

    save_embeddings(m, tokens, path, TableSelection::kBoth);
    const LoadedEmbeddings both = load_embeddings(path);
    CHECK(both.has_output);
    CHECK(both.model == m);

    save_embeddings(m, tokens, path, TableSelection::kOutput);
    CHECK(load_embeddings(path).model.input_table() == m.output_table());
}

TEST_CASE("double tables serialize to at least nine significant digits") {
    TempDir dir;
    auto m = init_model<double>(2, 2, 4);
    m.input(1)[0] = 0.1234567890123;
    const std::vector<std::string> tokens{"x", "y"};
    save_embeddings(m, tokens, dir.path() / "e.txt");
    const auto in = load_embeddings(dir.path() / "e.txt");
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(in.model.input_table()[i] - m.input_table()[i]) < 1e-8);
}

TEST_CASE("header and rows must agree") {
    TempDir dir;
    try {
        load_embeddings(dir.write("e.txt", "3 2\na 1 2\nb 3 4\n"));
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.find('3') != std::string::npos);
        CHECK(what.find('2') != std::string::npos);
    }
    CHECK_THROWS_AS(load_embeddings(dir.write("bad.txt", "2 2\na 1 2\nb 3\n")), Error);
    CHECK_THROWS_AS(load_embeddings(dir.write("mixed.txt", "2 1\na 1\nb 3 4\n")), Error);
    CHECK_THROWS_AS(load_embeddings(dir.write("nan.txt", "1 1\na x\n")), Error);
    CHECK_THROWS_AS(load_embeddings(dir.path() / "missing.txt"), Error);
}

TEST_CASE("tokens with whitespace are rejected at save time") {
    TempDir dir;
    const auto m = init_model<float>(2, 2, 1);
    const std::vector<std::string> tokens{"a", "b c"};
    CHECK_THROWS_AS(save_embeddings(m, tokens, dir.path() / "e.txt"), Error);
    const std::vector<std::string> short_list{"a"};
    CHECK_THROWS_AS(save_embeddings(m, short_list, dir.path() / "e.txt"), Error);
}

TEST_CASE("table selection names") {
    for (auto t : {TableSelection::kInput, TableSelection::kOutput, TableSelection::kBoth})
        CHECK(parse_table_selection(to_string(t)) == t);
    CHECK_THROWS_AS(parse_table_selection("left"), Error);
}

}  // TEST_SUITE
