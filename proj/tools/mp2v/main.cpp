// mp2v: train, evaluate and inspect Prod2Vec / Meta-Prod2Vec session embeddings.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mp2v/error.hpp"

namespace {

using namespace mp2v;

// Flags shared by train, eval and ablate. Unset flags leave the config (file or default) alone.
struct RunFlags {
    std::optional<std::string> config;
    std::optional<std::string> sessions;
    std::vector<std::string> metadata;
    std::optional<std::string> mode;
    std::optional<std::string> phase;
    std::optional<std::size_t> dim;
    std::optional<int> window;
    std::optional<int> epochs;
    std::optional<std::size_t> negatives;
    std::optional<double> learning_rate;
    std::optional<std::int64_t> min_count;
    std::optional<double> subsample;
    std::optional<double> lambda;
    std::optional<double> lambda_im, lambda_jm, lambda_mi, lambda_mm;
    std::vector<double> alpha_grid;
    std::vector<std::size_t> k_list;
    std::optional<std::size_t> bootstrap;
    std::optional<std::string> methods;
    std::optional<std::string> table;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
    cmd.add_option("--config", f.config, "JSON run configuration; flags given here override it")
        ->check(CLI::ExistingFile);
    cmd.add_option("--sessions", f.sessions, "Sessions file: user<TAB>item item ...");
    cmd.add_option("--metadata", f.metadata, "Item attribute file as NAME=PATH (repeatable)");
    cmd.add_option("--mode", f.mode, "prod2vec or metaprod2vec")->check(CLI::IsMember({"prod2vec", "metaprod2vec"}));
    cmd.add_option("--dim", f.dim, "Embedding dimension");
    cmd.add_option("--window", f.window, "Context window");
    cmd.add_option("--epochs", f.epochs, "Training epochs");
    cmd.add_option("--negatives", f.negatives, "Negative samples per pair");
    cmd.add_option("--learning-rate", f.learning_rate, "Initial SGD learning rate");
    cmd.add_option("--min-count", f.min_count, "Drop items seen fewer times in training");
    cmd.add_option("--subsample", f.subsample, "Frequent-item subsampling threshold (0 disables)");
    cmd.add_option("--lambda", f.lambda, "Weight of every side-information pair kind");
    cmd.add_option("--lambda-im", f.lambda_im, "Weight of metadata -> own item pairs");
    cmd.add_option("--lambda-jm", f.lambda_jm, "Weight of metadata -> context item pairs");
    cmd.add_option("--lambda-mi", f.lambda_mi, "Weight of item -> context metadata pairs");
    cmd.add_option("--lambda-mm", f.lambda_mm, "Weight of metadata -> context metadata pairs");
    cmd.add_option("--alpha-grid", f.alpha_grid, "Mix weights to try, comma separated")->delimiter(',');
    cmd.add_option("--k-list", f.k_list, "Cutoffs K, comma separated")->delimiter(',');
    cmd.add_option("--bootstrap", f.bootstrap, "Bootstrap resamples for confidence intervals (0 disables)");
    cmd.add_option("--methods", f.methods,
                   "Methods to evaluate, comma separated; full names or report stems such as mix_prod2vec_cocounts");
    cmd.add_option("--table", f.table, "Vectors used for cosine scoring: input, output or both")
        ->check(CLI::IsMember({"input", "output", "both"}));
    cmd.add_option("--seed", f.seed, "Random seed");
    cmd.add_option("--threads", f.threads, "Worker threads");
    cmd.add_option("--out", f.out, "Output directory");
}

// Splits at commas outside parentheses, so "Mix(Prod2Vec,CoCounts)" stays whole,
// and maps report stems back to method names.
std::vector<std::string> parse_methods(const std::string& text) {
    std::vector<std::string> parts(1);
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.emplace_back();
        } else {
            parts.back().push_back(c);
        }
    }
    std::vector<std::string> methods;
    for (const auto& part : parts) {
        std::string name = part;
        for (std::string_view m : kMethodNames)
            if (part == method_file_stem(m)) name = m;
        methods.push_back(name);
    }
    return methods;
}

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& target) {
    if (flag) target = static_cast<U>(*flag);
}

RunConfig resolve(const RunFlags& f) {
    RunConfig c = f.config ? RunConfig::from_json_file(*f.config) : RunConfig{};
    apply(f.sessions, c.sessions);
    if (!f.metadata.empty()) {
        c.metadata.clear();
        for (const auto& spec : f.metadata) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
                throw Error("--metadata expects NAME=PATH, got '" + spec + "'");
            }
            c.metadata.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
        }
    }
    if (f.mode) c.mode = parse_mode(*f.mode);
    if (f.phase) {
        if (*f.phase != "both") parse_phase(*f.phase);
        c.phase = *f.phase;
    }
    HyperParams& p = c.params;
    apply(f.dim, p.dim);
    apply(f.window, p.window);
    apply(f.epochs, p.epochs);
    apply(f.negatives, p.negatives);
    apply(f.learning_rate, p.learning_rate);
    apply(f.min_count, p.min_count);
    apply(f.subsample, p.subsample);
    if (f.lambda)
        for (PairKind k : kAllPairKinds)
            if (k != PairKind::kJI) p.lambda[static_cast<std::size_t>(k)] = *f.lambda;
    apply(f.lambda_im, p.lambda[static_cast<std::size_t>(PairKind::kIM)]);
    apply(f.lambda_jm, p.lambda[static_cast<std::size_t>(PairKind::kJM)]);
    apply(f.lambda_mi, p.lambda[static_cast<std::size_t>(PairKind::kMI)]);
    apply(f.lambda_mm, p.lambda[static_cast<std::size_t>(PairKind::kMM)]);
    apply(f.seed, p.seed);
    apply(f.threads, p.threads);
    if (!f.alpha_grid.empty()) c.eval.alpha_grid = f.alpha_grid;
    if (!f.k_list.empty()) c.eval.k_list = f.k_list;
    apply(f.bootstrap, c.eval.bootstrap_samples);
    if (f.methods) c.eval.methods = parse_methods(*f.methods);
    if (f.table) c.eval.embedding_table = parse_table_selection(*f.table);
    apply(f.out, c.out);
    if (c.sessions.empty()) throw Error("no sessions file given (--sessions or \"sessions\" in --config)");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prod2Vec and Meta-Prod2Vec session embeddings for next-item recommendation"};
    app.require_subcommand(1);

    RunFlags train_flags, eval_flags, ablate_flags;
    CLI::App* train = app.add_subcommand("train", "Train embeddings for the tuning and/or final split");
    add_run_flags(*train, train_flags);
    train->add_option("--phase", train_flags.phase, "tuning, final or both")
        ->check(CLI::IsMember({"tuning", "final", "both"}));

    CLI::App* eval = app.add_subcommand("eval", "Evaluate and compare methods on the final split");
    add_run_flags(*eval, eval_flags);

    CLI::App* ablate = app.add_subcommand("ablate", "Retrain with subsets of the side-information terms");
    add_run_flags(*ablate, ablate_flags);

    cli::NnRequest nn_request;
    std::optional<std::string> nn_vocab, nn_table;
    CLI::App* nn = app.add_subcommand("nn", "Print nearest items of a token by cosine similarity");
    nn->add_option("--embeddings", nn_request.embeddings, "Embedding file written by train")
        ->required()
        ->check(CLI::ExistingFile);
    nn->add_option("--vocab", nn_vocab, "Token kinds (default: vocab.tsv next to the embeddings)");
    nn->add_option("--query,-q", nn_request.query, "Item or metadata token")->required();
    nn->add_option("-k", nn_request.k, "Number of neighbours")->capture_default_str()->check(CLI::PositiveNumber);
    nn->add_option("--table", nn_table, "input, output or both")->check(CLI::IsMember({"input", "output", "both"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cli::cmd_train(resolve(train_flags));
        if (*eval) return cli::cmd_eval(resolve(eval_flags));
        if (*ablate) return cli::cmd_ablate(resolve(ablate_flags));
        if (*nn) {
            if (nn_vocab) nn_request.vocab = *nn_vocab;
            if (nn_table) nn_request.table = parse_table_selection(*nn_table);
            return cli::cmd_nn(nn_request);
        }
    } catch (const std::exception& e) {
        std::cerr << "mp2v: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
