#pragma once
// Nearest-neighbor retrieval over a trained embedding table: exact linear
// scan, ascending distance, ties broken by entity key. Multi-seed queries
// score each candidate by its minimum distance to any seed.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hyprec/embedding.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/euclidean_baseline.hpp"
#include "hyprec/poincare.hpp"

namespace hyprec {

enum class Metric { Hyperbolic, Cosine };

inline double metric_distance(Metric metric, std::span<const double> u, std::span<const double> v) {
    return metric == Metric::Hyperbolic ? poincare_distance(u, v) : cosine_distance(u, v);
}

struct Query {
    std::vector<EntityId> seeds;  // nonempty, all present in the table
    EntityKind target_kind = EntityKind::Track;
    std::size_t k = 10;
    bool exclude_seeds = true;
    // Optional caller-supplied candidate filter (business rules live outside).
    std::function<bool(const EntityId&)> filter;
};

struct RankedResult {
    EntityId entity;
    double distance = 0.0;
};

namespace detail {

inline void sort_and_truncate(std::vector<RankedResult>& results, std::size_t k) {
    std::sort(results.begin(), results.end(), [](const RankedResult& a, const RankedResult& b) {
        if (a.distance != b.distance) {
            return a.distance < b.distance;
        }
        return a.entity.key < b.entity.key;
    });
    if (results.size() > k) {
        results.resize(k);
    }
}

}  // namespace detail

// The k entities of target_kind closest to seed; the seed itself is a valid
// candidate when its kind matches.
inline std::vector<RankedResult> nearest(const EmbeddingTable& table, const EntityId& seed,
                                         EntityKind target_kind, std::size_t k,
                                         Metric metric = Metric::Hyperbolic) {
    if (k < 1) {
        throw std::invalid_argument("nearest: k must be >= 1");
    }
    const auto seed_point = table.point(seed);  // throws lookup_error when absent
    std::vector<RankedResult> results;
    for (const auto& id : table.entities()) {
        if (id.kind != target_kind) {
            continue;
        }
        results.push_back({id, metric_distance(metric, seed_point, table.point(id))});
    }
    detail::sort_and_truncate(results, k);
    return results;
}

// Min-over-seeds retrieval for a listening-history query.
inline std::vector<RankedResult> recommend(const EmbeddingTable& table, const Query& query,
                                           Metric metric = Metric::Hyperbolic) {
    if (query.seeds.empty()) {
        throw std::invalid_argument("recommend: query needs at least one seed");
    }
    if (query.k < 1) {
        throw std::invalid_argument("recommend: k must be >= 1");
    }
    std::string missing;
    for (const auto& seed : query.seeds) {
        if (!table.contains(seed)) {
            missing += missing.empty() ? "" : ", ";
            missing += to_string(seed);
        }
    }
    if (!missing.empty()) {
        throw lookup_error("recommend: seeds missing from the embedding table: " + missing);
    }
    std::unordered_set<EntityId, EntityIdHash> seed_set(query.seeds.begin(), query.seeds.end());
    std::vector<RankedResult> results;
    for (const auto& id : table.entities()) {
        if (id.kind != query.target_kind) {
            continue;
        }
        if (query.exclude_seeds && seed_set.contains(id)) {
            continue;
        }
        if (query.filter && !query.filter(id)) {
            continue;
        }
        const auto candidate = table.point(id);
        double best = metric_distance(metric, table.point(query.seeds.front()), candidate);
        for (std::size_t s = 1; s < query.seeds.size(); ++s) {
            best = std::min(best, metric_distance(metric, table.point(query.seeds[s]), candidate));
        }
        results.push_back({id, best});
    }
    detail::sort_and_truncate(results, query.k);
    return results;
}

}  // namespace hyprec
