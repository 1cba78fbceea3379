// Writes a synthetic sessions file and its category metadata file.
//   make_fixture OUT_DIR [sessions] [seed]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_fixture OUT_DIR [sessions] [seed]\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    mp2v::synthetic::Options options;
    options.sessions = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 500;
    options.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 7;
    options.categories = 10;
    options.items_per_category = 20;
    options.zipf_exponent = 1.0;

    const auto corpus = mp2v::synthetic::generate(options);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "sessions.tsv") << mp2v::synthetic::to_sessions_tsv(corpus.sessions);
    std::ofstream(dir / "category.tsv") << mp2v::synthetic::to_metadata_tsv(corpus.categories, corpus.sessions);
    std::cout << "wrote " << corpus.sessions.size() << " sessions to " << dir.string() << '\n';
    return 0;
}
