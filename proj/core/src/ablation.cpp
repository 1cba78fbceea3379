#include <cstdio>
#include <sstream>

#include "mp2v/error.hpp"
#include "mp2v/pipeline.hpp"

namespace mp2v {

std::vector<AblationConfig> ablation_configs() {
    using K = PairKind;
    return {
        {"only IM", {K::kJI, K::kIM}},
        {"only MI", {K::kJI, K::kMI}},
        {"only JM", {K::kJI, K::kJM}},
        {"without MM", {K::kJI, K::kIM, K::kMI, K::kJM}},
        {"full", KindSet::all()},
    };
}

std::optional<double> lift_fraction(double config, double baseline, double full) {
    const double denominator = full - baseline;
    if (denominator == 0.0) return std::nullopt;
    return (config - baseline) / denominator;
}

AblationTable ablation_run(const SplitCorpus& final_split, std::span<const MetadataMap> metadata,
                           const HyperParams& params, const EvalReport& baseline, std::size_t k,
                           unsigned eval_threads, TableSelection vectors) {
    if (final_split.phase != Phase::kFinal) throw Error("ablation runs on the final split");
    const std::string hr_name = "HR@" + std::to_string(k);
    const std::string ndcg_name = "NDCG@" + std::to_string(k);

    AblationTable table;
    table.k = k;
    table.baseline_hit_ratio = baseline.metric(hr_name).estimate;
    table.baseline_ndcg = baseline.metric(ndcg_name).estimate;

    const EvalContext ctx(final_split, params.min_count, params.window);
    EvalOptions options;
    options.k_list = {k};
    options.bootstrap_samples = 0;
    options.threads = eval_threads;

    for (const auto& config : ablation_configs()) {
        HyperParams p = params;
        p.kinds = config.kinds;
        const TrainedModel trained = train_embeddings(final_split, metadata, p);
        const EmbeddingModel aligned = align_embeddings(ctx.items, trained.table());
        const EmbeddingScorer scorer(ctx.items, aligned, config.name, vectors);
        const EvalReport report = evaluate(scorer, ctx.cases, options);
        AblationRow row;
        row.name = config.name;
        row.hit_ratio = report.metric(hr_name).estimate;
        row.ndcg = report.metric(ndcg_name).estimate;
        table.rows.push_back(std::move(row));
    }
    const AblationRow& full = table.rows.back();
    for (auto& row : table.rows) {
        row.hit_ratio_lift = lift_fraction(row.hit_ratio, table.baseline_hit_ratio, full.hit_ratio);
        row.ndcg_lift = lift_fraction(row.ndcg, table.baseline_ndcg, full.ndcg);
    }
    return table;
}

std::string AblationTable::to_tsv() const {
    std::ostringstream out;
    const std::string ks = std::to_string(k);
    out << "configuration\tHR@" << ks << "\tNDCG@" << ks << "\tHR@" << ks << " lift\tNDCG@" << ks << " lift\n";
    char buffer[64];
    auto percent = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "NA";
        std::snprintf(buffer, sizeof(buffer), "%.1f%%", *v * 100.0);
        return buffer;
    };
    for (const auto& row : rows) {
        std::snprintf(buffer, sizeof(buffer), "%.6f\t%.6f", row.hit_ratio, row.ndcg);
        out << row.name << '\t' << buffer << '\t' << percent(row.hit_ratio_lift) << '\t' << percent(row.ndcg_lift)
            << '\n';
    }
    return out.str();
}

}  // namespace mp2v
