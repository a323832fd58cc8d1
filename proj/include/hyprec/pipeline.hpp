#pragma once
// End-to-end pipeline: ingest -> fit priors -> score -> build links -> train.
//
// Every stage is a file-to-file function over the output directory, so stages
// re-run individually against cached upstream artifacts. Artifacts are written
// to "<name>.partial" and renamed on success; a failed stage leaves the
// partial file behind and halts with a stage-tagged error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hyprec/empirical_bayes.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/euclidean_baseline.hpp"
#include "hyprec/graph.hpp"
#include "hyprec/ingest.hpp"
#include "hyprec/link_builder.hpp"
#include "hyprec/poincare.hpp"

namespace hyprec {

struct PipelineConfig {
    std::filesystem::path spins;
    std::filesystem::path completions;
    std::filesystem::path dims;
    std::filesystem::path out_dir;
    TrainConfig train;
    std::string geometry = "hyperbolic";  // or "cosine" for the eval baseline
    std::size_t prune_min_links = 20;
    double quantile_alpha = 0.05;
    double quartile_level = 0.75;
    std::int64_t lookback_cap_days = 183;

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig cfg;
        cfg.spins = j.value("spins", std::string{});
        cfg.completions = j.value("completions", std::string{});
        cfg.dims = j.value("dims", std::string{});
        cfg.out_dir = j.value("out_dir", std::string{});
        cfg.train.rank = j.value("rank", cfg.train.rank);
        cfg.train.epochs = j.value("epochs", cfg.train.epochs);
        cfg.train.learning_rate = j.value("learning_rate", cfg.train.learning_rate);
        cfg.train.burn_in_epochs = j.value("burn_in_epochs", cfg.train.burn_in_epochs);
        cfg.train.burn_in_lr_factor = j.value("burn_in_lr_factor", cfg.train.burn_in_lr_factor);
        cfg.train.negatives_per_positive =
            j.value("negatives_per_positive", cfg.train.negatives_per_positive);
        cfg.train.init_scale = j.value("init_scale", cfg.train.init_scale);
        cfg.train.rng_seed = j.value("seed", cfg.train.rng_seed);
        cfg.train.ball_eps = j.value("ball_eps", cfg.train.ball_eps);
        cfg.train.threads = j.value("threads", cfg.train.threads);
        cfg.geometry = j.value("geometry", cfg.geometry);
        cfg.prune_min_links = j.value("prune_min_links", cfg.prune_min_links);
        cfg.quantile_alpha = j.value("quantile_alpha", cfg.quantile_alpha);
        cfg.quartile_level = j.value("quartile_level", cfg.quartile_level);
        cfg.lookback_cap_days = j.value("lookback_cap_days", cfg.lookback_cap_days);
        return cfg;
    }

    static PipelineConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) {
            throw validation_error("cannot open config file " + path.string());
        }
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    nlohmann::json to_json() const {
        return {{"spins", spins.string()},
                {"completions", completions.string()},
                {"dims", dims.string()},
                {"out_dir", out_dir.string()},
                {"rank", train.rank},
                {"epochs", train.epochs},
                {"learning_rate", train.learning_rate},
                {"burn_in_epochs", train.burn_in_epochs},
                {"burn_in_lr_factor", train.burn_in_lr_factor},
                {"negatives_per_positive", train.negatives_per_positive},
                {"init_scale", train.init_scale},
                {"seed", train.rng_seed},
                {"ball_eps", train.ball_eps},
                {"threads", train.threads},
                {"geometry", geometry},
                {"prune_min_links", prune_min_links},
                {"quantile_alpha", quantile_alpha},
                {"quartile_level", quartile_level},
                {"lookback_cap_days", lookback_cap_days}};
    }

    std::filesystem::path priors_path() const { return out_dir / "priors.jsonl"; }
    std::filesystem::path scores_path() const { return out_dir / "scores.tsv"; }
    std::filesystem::path links_path() const { return out_dir / "links.tsv"; }
    std::filesystem::path embeddings_path() const { return out_dir / "embeddings.tsv"; }
    std::filesystem::path embeddings_meta_path() const { return out_dir / "embeddings_meta.json"; }
    std::filesystem::path manifest_path() const { return out_dir / "manifest.json"; }
};

namespace detail {

template <class Writer>
void write_artifact(const std::filesystem::path& path, Writer&& writer) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path partial = path;
    partial += ".partial";
    {
        std::ofstream out(partial, std::ios::binary);
        if (!out) {
            throw validation_error("cannot open " + partial.string() + " for writing");
        }
        writer(out);
        if (!out) {
            throw validation_error("failed while writing " + partial.string());
        }
    }
    std::filesystem::rename(partial, path);
}

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("[" + stage + "] " + e.what());
    }
}

}  // namespace detail

struct PriorRecord {
    EntityId station;
    std::string model;  // "beta" | "gamma"
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t n_obs = 0;
};

inline std::vector<PriorRecord> load_priors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open priors file " + path.string() +
                               " (run fit-priors first)");
    }
    std::vector<PriorRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("priors line " + std::to_string(line_no) + ": " + e.what());
        }
        PriorRecord rec;
        rec.station = parse_entity(j.at("station").get<std::string>());
        rec.model = j.at("model").get<std::string>();
        rec.alpha = j.at("alpha").get<double>();
        rec.beta = j.at("beta").get<double>();
        rec.n_obs = j.at("n_obs").get<std::size_t>();
        if (rec.model != "beta" && rec.model != "gamma") {
            throw validation_error("priors line " + std::to_string(line_no) + ": unknown model \"" +
                                   rec.model + "\"");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

struct FitPriorsSummary {
    std::size_t groups = 0;
    std::size_t fitted = 0;
    std::size_t fallbacks = 0;
};

// Fits one prior per station (beta for custom artist stations, gamma for
// broadcast) and persists them as JSON lines sorted by station.
inline FitPriorsSummary stage_fit_priors(const PipelineConfig& cfg) {
    return detail::run_stage("fit-priors", [&]() -> FitPriorsSummary {
        const IngestResult data = ingest(cfg.spins, cfg.completions, cfg.dims,
                                         {.lookback_cap_days = cfg.lookback_cap_days});
        FitPriorsSummary summary;
        std::vector<PriorRecord> records;
        for (const auto& group : data.binomial_groups) {
            const auto outcome = fit_beta_prior_or_fallback(group.observations);
            records.push_back({group.station, "beta", outcome.prior.alpha, outcome.prior.beta,
                               group.observations.size()});
            (outcome.fell_back ? summary.fallbacks : summary.fitted) += 1;
        }
        for (const auto& group : data.poisson_groups) {
            const auto outcome = fit_gamma_prior_or_fallback(group.observations);
            records.push_back({group.station, "gamma", outcome.prior.shape, outcome.prior.rate,
                               group.observations.size()});
            (outcome.fell_back ? summary.fallbacks : summary.fitted) += 1;
        }
        std::sort(records.begin(), records.end(),
                  [](const PriorRecord& a, const PriorRecord& b) { return a.station < b.station; });
        detail::write_artifact(cfg.priors_path(), [&](std::ostream& out) {
            for (const auto& rec : records) {
                nlohmann::json line{{"station", to_string(rec.station)},
                                    {"model", rec.model},
                                    {"alpha", rec.alpha},
                                    {"beta", rec.beta},
                                    {"n_obs", rec.n_obs}};
                out << line.dump() << '\n';
            }
        });
        summary.groups = records.size();
        return summary;
    });
}

struct ScoreSummary {
    std::size_t stations = 0;
    std::size_t score_rows = 0;
    std::size_t unknown_artist_tracks = 0;
};

// Posterior lower-credible-bound scores for every (station, track) and the
// summed child-artist scores; audit TSV rows are station <TAB> child <TAB> score.
inline ScoreSummary stage_score(const PipelineConfig& cfg) {
    return detail::run_stage("score", [&]() -> ScoreSummary {
        const IngestResult data = ingest(cfg.spins, cfg.completions, cfg.dims,
                                         {.lookback_cap_days = cfg.lookback_cap_days});
        std::unordered_map<EntityId, PriorRecord, EntityIdHash> priors;
        for (auto& rec : load_priors(cfg.priors_path())) {
            priors.emplace(rec.station, std::move(rec));
        }
        const auto prior_for = [&](const EntityId& station, const char* model) -> const PriorRecord& {
            const auto it = priors.find(station);
            if (it == priors.end() || it->second.model != model) {
                throw lookup_error("no fitted " + std::string(model) + " prior for station " +
                                   to_string(station));
            }
            return it->second;
        };

        ScoreSummary summary;
        std::vector<StationScores> all_scores;
        for (const auto& group : data.binomial_groups) {
            const auto& rec = prior_for(group.station, "beta");
            all_scores.push_back(score_station(group.station, BetaPrior{rec.alpha, rec.beta},
                                               group.observations, group.authorship,
                                               cfg.quantile_alpha));
        }
        for (const auto& group : data.poisson_groups) {
            const auto& rec = prior_for(group.station, "gamma");
            all_scores.push_back(score_station(group.station, GammaPrior{rec.alpha, rec.beta},
                                               group.observations, group.authorship,
                                               cfg.quantile_alpha));
        }
        std::sort(all_scores.begin(), all_scores.end(),
                  [](const StationScores& a, const StationScores& b) { return a.station < b.station; });
        detail::write_artifact(cfg.scores_path(), [&](std::ostream& out) {
            for (const auto& station : all_scores) {
                for (const auto* list : {&station.track_scores, &station.artist_scores}) {
                    for (const auto& child : *list) {
                        out << to_string(station.station) << '\t' << to_string(child.child) << '\t'
                            << detail::format_double(child.score) << '\n';
                        ++summary.score_rows;
                    }
                }
                summary.unknown_artist_tracks += station.unknown_artist_tracks;
            }
        });
        summary.stations = all_scores.size();
        return summary;
    });
}

// Reads the audit TSV back into per-station score lists.
inline std::vector<StationScores> load_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open scores file " + path.string() + " (run score first)");
    }
    std::map<EntityId, StationScores> stations;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            throw validation_error("scores tsv line " + std::to_string(line_no) +
                                   ": expected 3 tab-separated fields");
        }
        const EntityId station = parse_entity(std::string_view(line).substr(0, tab1));
        const EntityId child = parse_entity(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
        double score{};
        const char* begin = line.data() + tab2 + 1;
        const auto res = std::from_chars(begin, line.data() + line.size(), score);
        if (res.ec != std::errc{}) {
            throw validation_error("scores tsv line " + std::to_string(line_no) + ": bad score");
        }
        auto& entry = stations[station];
        entry.station = station;
        if (child.kind == EntityKind::Track) {
            entry.track_scores.push_back({child, score});
        } else if (child.kind == EntityKind::Artist) {
            entry.artist_scores.push_back({child, score});
        } else {
            throw validation_error("scores tsv line " + std::to_string(line_no) +
                                   ": child must be a track or artist");
        }
    }
    std::vector<StationScores> out;
    out.reserve(stations.size());
    for (auto& [station, scores] : stations) {
        out.push_back(std::move(scores));
    }
    return out;
}

struct BuildLinksSummary {
    std::size_t links_pre_prune = 0;
    std::size_t entities_pre_prune = 0;
    std::size_t links_post_prune = 0;
    std::size_t entities_post_prune = 0;
};

inline BuildLinksSummary stage_build_links(const PipelineConfig& cfg) {
    return detail::run_stage("build-links", [&]() -> BuildLinksSummary {
        const std::vector<StationScores> scores = load_scores(cfg.scores_path());
        const IngestResult data = ingest(cfg.spins, cfg.completions, cfg.dims,
                                         {.lookback_cap_days = cfg.lookback_cap_days});
        const HierarchyGraph assembled = assemble_links(scores, data.dims, cfg.quartile_level);
        const HierarchyGraph graph = assembled.pruned(cfg.prune_min_links);
        detail::write_artifact(cfg.links_path(), [&](std::ostream& out) { graph.save_tsv(out); });
        return {assembled.link_count(), assembled.entity_count(), graph.link_count(),
                graph.entity_count()};
    });
}

struct TrainSummary {
    std::size_t embedded_entities = 0;
    double final_loss = 0.0;
    std::uint64_t steps = 0;
    std::uint64_t containment_violations = 0;
};

inline TrainSummary stage_train(const PipelineConfig& cfg) {
    return detail::run_stage("train", [&]() -> TrainSummary {
        std::ifstream in(cfg.links_path());
        if (!in) {
            throw validation_error("cannot open links file " + cfg.links_path().string() +
                                   " (run build-links first)");
        }
        if (cfg.geometry != "hyperbolic" && cfg.geometry != "cosine") {
            throw validation_error("unknown geometry \"" + cfg.geometry +
                                   "\" (hyperbolic|cosine)");
        }
        const HierarchyGraph graph = HierarchyGraph::load_tsv(in);
        TrainStats stats;
        const EmbeddingTable table = cfg.geometry == "cosine"
                                         ? euclidean_baseline_train(graph, cfg.train, &stats)
                                         : train(graph, cfg.train, &stats);
        detail::write_artifact(cfg.embeddings_path(),
                               [&](std::ostream& out) { table.save_tsv(out); });
        detail::write_artifact(cfg.embeddings_meta_path(), [&](std::ostream& out) {
            nlohmann::json meta{{"config", cfg.to_json()},
                                {"final_loss", stats.final_loss},
                                {"steps", stats.steps},
                                {"containment_violations", stats.containment_violations}};
            out << meta.dump(2) << '\n';
        });
        return {table.size(), stats.final_loss, stats.steps, stats.containment_violations};
    });
}

struct RunManifest {
    nlohmann::json json;
};

// Full pipeline; writes priors.jsonl, scores.tsv, links.tsv, embeddings.tsv,
// embeddings_meta.json and manifest.json under out_dir.
inline RunManifest run_pipeline(const PipelineConfig& cfg) {
    const IngestResult data =
        detail::run_stage("ingest", [&] {
            return ingest(cfg.spins, cfg.completions, cfg.dims,
                          {.lookback_cap_days = cfg.lookback_cap_days});
        });
    const FitPriorsSummary priors = stage_fit_priors(cfg);
    const ScoreSummary scores = stage_score(cfg);
    const BuildLinksSummary links = stage_build_links(cfg);
    const TrainSummary trained = stage_train(cfg);

    nlohmann::json entity_counts;
    for (const auto& [kind, count] : data.entity_counts) {
        entity_counts[std::string(to_string(kind))] = count;
    }
    RunManifest manifest;
    manifest.json = {
        {"config", cfg.to_json()},
        {"stages",
         {{"ingest",
           {{"spin_records", data.spin_records},
            {"completion_records", data.completion_records},
            {"dim_records", data.dim_records},
            {"entities", entity_counts}}},
          {"fit_priors",
           {{"groups", priors.groups}, {"fitted", priors.fitted}, {"fallbacks", priors.fallbacks}}},
          {"score",
           {{"stations", scores.stations},
            {"score_rows", scores.score_rows},
            {"unknown_artist_tracks", scores.unknown_artist_tracks}}},
          {"build_links",
           {{"links_pre_prune", links.links_pre_prune},
            {"entities_pre_prune", links.entities_pre_prune},
            {"links_post_prune", links.links_post_prune},
            {"entities_post_prune", links.entities_post_prune}}},
          {"train",
           {{"embedded_entities", trained.embedded_entities},
            {"final_loss", trained.final_loss},
            {"steps", trained.steps},
            {"containment_violations", trained.containment_violations}}}}},
        {"artifacts",
         {{"priors", cfg.priors_path().string()},
          {"scores", cfg.scores_path().string()},
          {"links", cfg.links_path().string()},
          {"embeddings", cfg.embeddings_path().string()},
          {"embeddings_meta", cfg.embeddings_meta_path().string()}}}};
    detail::run_stage("manifest", [&] {
        detail::write_artifact(cfg.manifest_path(),
                               [&](std::ostream& out) { out << manifest.json.dump(2) << '\n'; });
        return 0;
    });
    return manifest;
}

}  // namespace hyprec
