// Command-line pipeline: ingestion, prior fitting, scoring, link building,
// embedding training, retrieval queries, evaluation, and the permutation test.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyprec/eval.hpp"
#include "hyprec/euclidean_baseline.hpp"
#include "hyprec/pipeline.hpp"
#include "hyprec/recommender.hpp"

namespace {

struct Overrides {
    std::optional<std::string> spins, completions, dims, out_dir, geometry;
    std::optional<std::size_t> rank, epochs, burn_in_epochs, negatives, threads, prune;
    std::optional<double> learning_rate, burn_in_lr_factor, init_scale, ball_eps;
    std::optional<double> quantile_alpha, quartile_level;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> lookback_cap_days;
};

void add_pipeline_options(CLI::App& cmd, std::string& config_path, Overrides& o) {
    cmd.add_option("--config", config_path, "JSON config file; flags override its fields");
    cmd.add_option("--spins", o.spins, "spin records JSONL");
    cmd.add_option("--completions", o.completions, "completion records JSONL");
    cmd.add_option("--dims", o.dims, "dimensional records JSONL");
    cmd.add_option("--out-dir", o.out_dir, "artifact output directory");
    cmd.add_option("--rank", o.rank, "embedding rank");
    cmd.add_option("--epochs", o.epochs, "training epochs");
    cmd.add_option("--learning-rate", o.learning_rate, "SGD learning rate");
    cmd.add_option("--burn-in-epochs", o.burn_in_epochs, "low-rate burn-in epochs");
    cmd.add_option("--burn-in-lr-factor", o.burn_in_lr_factor, "burn-in learning-rate factor");
    cmd.add_option("--negatives-per-positive", o.negatives, "negative samples per link");
    cmd.add_option("--init-scale", o.init_scale, "uniform init half-width");
    cmd.add_option("--seed", o.seed, "RNG seed");
    cmd.add_option("--ball-eps", o.ball_eps, "ball boundary margin");
    cmd.add_option("--threads", o.threads, "training workers (1 = deterministic)");
    cmd.add_option("--geometry", o.geometry, "hyperbolic|cosine (cosine = eval baseline)");
    cmd.add_option("--prune-min-links", o.prune, "minimum total links per entity");
    cmd.add_option("--quantile-alpha", o.quantile_alpha, "lower credible bound level");
    cmd.add_option("--quartile-level", o.quartile_level, "link-selection percentile");
    cmd.add_option("--lookback-cap-days", o.lookback_cap_days, "maximum days_presented");
}

hyprec::PipelineConfig resolve(const std::string& config_path, const Overrides& o) {
    hyprec::PipelineConfig cfg;
    if (!config_path.empty()) {
        cfg = hyprec::PipelineConfig::from_file(config_path);
    }
    if (o.spins) cfg.spins = *o.spins;
    if (o.completions) cfg.completions = *o.completions;
    if (o.dims) cfg.dims = *o.dims;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.rank) cfg.train.rank = *o.rank;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
    if (o.burn_in_epochs) cfg.train.burn_in_epochs = *o.burn_in_epochs;
    if (o.burn_in_lr_factor) cfg.train.burn_in_lr_factor = *o.burn_in_lr_factor;
    if (o.negatives) cfg.train.negatives_per_positive = *o.negatives;
    if (o.init_scale) cfg.train.init_scale = *o.init_scale;
    if (o.seed) cfg.train.rng_seed = *o.seed;
    if (o.ball_eps) cfg.train.ball_eps = *o.ball_eps;
    if (o.threads) cfg.train.threads = *o.threads;
    if (o.geometry) cfg.geometry = *o.geometry;
    if (o.prune) cfg.prune_min_links = *o.prune;
    if (o.quantile_alpha) cfg.quantile_alpha = *o.quantile_alpha;
    if (o.quartile_level) cfg.quartile_level = *o.quartile_level;
    if (o.lookback_cap_days) cfg.lookback_cap_days = *o.lookback_cap_days;
    return cfg;
}

hyprec::EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw hyprec::validation_error("cannot open embeddings file " + path);
    }
    return hyprec::EmbeddingTable::load_tsv(in);
}

hyprec::HierarchyGraph load_links(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw hyprec::validation_error("cannot open links file " + path);
    }
    return hyprec::HierarchyGraph::load_tsv(in);
}

hyprec::Metric parse_metric(const std::string& name) {
    if (name == "hyperbolic") return hyprec::Metric::Hyperbolic;
    if (name == "cosine") return hyprec::Metric::Cosine;
    throw hyprec::validation_error("unknown metric \"" + name + "\" (hyperbolic|cosine)");
}

std::vector<double> load_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw hyprec::validation_error("cannot open values file " + path);
    }
    std::vector<double> values;
    double v{};
    while (in >> v) {
        values.push_back(v);
    }
    return values;
}

nlohmann::json eval_report_json(const hyprec::EvalReport& report) {
    nlohmann::json per_kind;
    for (const auto& [kind, stats] : report.per_kind) {
        per_kind[std::string(hyprec::to_string(kind))] = {{"links", stats.links},
                                                          {"mean_rank", stats.mean_rank},
                                                          {"mean_rank_raw", stats.mean_rank_raw},
                                                          {"map", stats.map}};
    }
    return {{"model", report.model},
            {"links", report.links},
            {"mean_rank", report.mean_rank},
            {"mean_rank_raw", report.mean_rank_raw},
            {"map", report.map},
            {"per_link_kind", per_kind}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchy embedding pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;

    auto* cmd_fit = app.add_subcommand("fit-priors", "fit per-station conjugate priors");
    auto* cmd_score = app.add_subcommand("score", "posterior lower-credible-bound scores");
    auto* cmd_links = app.add_subcommand("build-links", "assemble and prune the hierarchy graph");
    auto* cmd_train = app.add_subcommand("train", "train ball embeddings from links.tsv");
    auto* cmd_run = app.add_subcommand("run", "full pipeline: all stages in order");
    for (auto* cmd : {cmd_fit, cmd_score, cmd_links, cmd_train, cmd_run}) {
        add_pipeline_options(*cmd, config_path, overrides);
    }

    auto* cmd_recommend = app.add_subcommand("recommend", "nearest-neighbor retrieval");
    std::string rec_embeddings, rec_target = "track", rec_metric = "hyperbolic";
    std::vector<std::string> rec_seeds;
    std::size_t rec_k = 10;
    bool rec_include_seeds = false;
    cmd_recommend->add_option("--embeddings", rec_embeddings, "embeddings TSV")->required();
    cmd_recommend->add_option("--seeds", rec_seeds, "seed entities as kind:key")
        ->required()
        ->delimiter(',');
    cmd_recommend->add_option("--target-kind", rec_target, "entity kind to retrieve");
    cmd_recommend->add_option("-k,--k", rec_k, "number of results");
    cmd_recommend->add_flag("--include-seeds", rec_include_seeds, "keep seeds in the results");
    cmd_recommend->add_option("--metric", rec_metric, "hyperbolic|cosine");

    auto* cmd_eval = app.add_subcommand("eval", "reconstruction evaluation of a trained table");
    std::string eval_embeddings, eval_links, eval_metric = "hyperbolic", eval_tag;
    cmd_eval->add_option("--embeddings", eval_embeddings, "embeddings TSV")->required();
    cmd_eval->add_option("--links", eval_links, "links TSV")->required();
    cmd_eval->add_option("--metric", eval_metric, "hyperbolic|cosine");
    cmd_eval->add_option("--model-tag", eval_tag, "label recorded in the report");

    auto* cmd_permtest = app.add_subcommand("permtest", "bootstrap permutation test");
    std::string perm_a, perm_b;
    std::size_t perm_count = 10000;
    std::uint64_t perm_seed = 42;
    bool perm_dump_diffs = false;
    cmd_permtest->add_option("--group-a", perm_a, "file with one value per line")->required();
    cmd_permtest->add_option("--group-b", perm_b, "file with one value per line")->required();
    cmd_permtest->add_option("--permutations", perm_count, "number of permutations");
    cmd_permtest->add_option("--seed", perm_seed, "RNG seed");
    cmd_permtest->add_flag("--dump-diffs", perm_dump_diffs, "include all permutation diffs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_fit->parsed()) {
            const auto summary = hyprec::stage_fit_priors(resolve(config_path, overrides));
            std::cerr << "fit-priors: " << summary.groups << " stations (" << summary.fitted
                      << " fitted, " << summary.fallbacks << " fallbacks)\n";
        } else if (cmd_score->parsed()) {
            const auto summary = hyprec::stage_score(resolve(config_path, overrides));
            std::cerr << "score: " << summary.score_rows << " rows over " << summary.stations
                      << " stations\n";
        } else if (cmd_links->parsed()) {
            const auto summary = hyprec::stage_build_links(resolve(config_path, overrides));
            std::cerr << "build-links: " << summary.links_post_prune << "/"
                      << summary.links_pre_prune << " links kept after pruning\n";
        } else if (cmd_train->parsed()) {
            const auto summary = hyprec::stage_train(resolve(config_path, overrides));
            std::cerr << "train: " << summary.embedded_entities
                      << " entities embedded, final loss " << summary.final_loss << "\n";
        } else if (cmd_run->parsed()) {
            const auto manifest = hyprec::run_pipeline(resolve(config_path, overrides));
            std::cerr << "run: wrote "
                      << manifest.json.at("artifacts").size() + 1 << " artifacts to "
                      << manifest.json.at("config").at("out_dir").get<std::string>() << "\n";
        } else if (cmd_recommend->parsed()) {
            hyprec::detail::run_stage("recommend", [&] {
                const auto table = load_embeddings(rec_embeddings);
                hyprec::Query query;
                for (const auto& seed : rec_seeds) {
                    query.seeds.push_back(hyprec::parse_entity(seed));
                }
                const auto kind = hyprec::parse_entity_kind(rec_target);
                if (!kind) {
                    throw hyprec::validation_error("unknown entity kind \"" + rec_target + "\"");
                }
                query.target_kind = *kind;
                query.k = rec_k;
                query.exclude_seeds = !rec_include_seeds;
                for (const auto& r : hyprec::recommend(table, query, parse_metric(rec_metric))) {
                    nlohmann::json line{{"entity", hyprec::to_string(r.entity)},
                                        {"distance", r.distance}};
                    std::cout << line.dump() << '\n';
                }
                return 0;
            });
        } else if (cmd_eval->parsed()) {
            hyprec::detail::run_stage("eval", [&] {
                const auto metric = parse_metric(eval_metric);
                const std::string tag =
                    !eval_tag.empty() ? eval_tag
                                      : (metric == hyprec::Metric::Hyperbolic ? "hyperbolic"
                                                                              : "euclidean-baseline");
                const auto report = hyprec::evaluate_reconstruction(
                    load_embeddings(eval_embeddings), load_links(eval_links), metric, tag);
                std::cout << eval_report_json(report).dump(2) << '\n';
                return 0;
            });
        } else if (cmd_permtest->parsed()) {
            hyprec::detail::run_stage("permtest", [&] {
                const auto a = load_values(perm_a);
                const auto b = load_values(perm_b);
                const auto result = hyprec::permutation_test(a, b, perm_count, perm_seed);
                nlohmann::json out{{"observed_diff", result.observed_diff},
                                   {"p_value", result.p_value},
                                   {"permutations", perm_count},
                                   {"seed", perm_seed}};
                if (perm_dump_diffs) {
                    out["permutation_diffs"] = result.permutation_diffs;
                }
                std::cout << out.dump(2) << '\n';
                return 0;
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
