#pragma once
// Reconstruction evaluation of a trained table against its link set, and the
// bootstrap permutation test used for difference-of-means significance.
//
// For each link (p -> c), c is ranked by distance to p among all embedded
// entities of c's kind. Two rank variants are reported: "filtered" excludes
// p's other true children (correct siblings are not penalized), "raw" keeps
// them. MAP uses filtered ranks. The parent is never its own candidate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hyprec/embedding.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/graph.hpp"
#include "hyprec/recommender.hpp"

namespace hyprec {

struct KindEval {
    std::size_t links = 0;
    double mean_rank = 0.0;      // filtered
    double mean_rank_raw = 0.0;  // siblings kept
    double map = 0.0;
};

struct EvalReport {
    std::string model = "hyperbolic";  // or "euclidean-baseline"
    std::size_t links = 0;
    double mean_rank = 0.0;
    double mean_rank_raw = 0.0;
    double map = 0.0;
    std::map<LinkKind, KindEval> per_kind;
};

inline EvalReport evaluate_reconstruction(const EmbeddingTable& table, const HierarchyGraph& graph,
                                          Metric metric = Metric::Hyperbolic,
                                          std::string model_tag = "hyperbolic") {
    for (const auto& id : graph.entities()) {
        if (!table.contains(id)) {
            throw lookup_error("evaluate_reconstruction: no embedding for entity " + to_string(id));
        }
    }
    std::array<std::vector<EntityId>, 5> by_kind;
    for (const auto& id : table.entities()) {
        by_kind[static_cast<std::size_t>(id.kind)].push_back(id);
    }

    struct Accum {
        std::size_t links = 0;
        double rank_sum = 0.0;
        double raw_rank_sum = 0.0;
        double ap_sum = 0.0;
    };
    Accum total;
    std::map<LinkKind, Accum> per_kind;

    for (const auto& link : graph.links()) {
        const auto parent_point = table.point(link.parent);
        const auto child_point = table.point(link.child);
        const double child_dist = metric_distance(metric, parent_point, child_point);

        std::unordered_set<EntityId, EntityIdHash> siblings;
        for (const auto& [kind, child] : graph.children_of(link.parent)) {
            if (child.kind == link.child.kind && child != link.child) {
                siblings.insert(child);
            }
        }

        std::size_t closer_filtered = 0;
        std::size_t closer_raw = 0;
        for (const auto& candidate : by_kind[static_cast<std::size_t>(link.child.kind)]) {
            if (candidate == link.child || candidate == link.parent) {
                continue;
            }
            const double d = metric_distance(metric, parent_point, table.point(candidate));
            const bool closer =
                d < child_dist || (d == child_dist && candidate.key < link.child.key);
            if (!closer) {
                continue;
            }
            ++closer_raw;
            if (!siblings.contains(candidate)) {
                ++closer_filtered;
            }
        }
        const double rank = static_cast<double>(closer_filtered + 1);
        const double raw_rank = static_cast<double>(closer_raw + 1);
        for (Accum* acc : {&total, &per_kind[link.kind]}) {
            acc->links += 1;
            acc->rank_sum += rank;
            acc->raw_rank_sum += raw_rank;
            acc->ap_sum += 1.0 / rank;
        }
    }

    const auto finish = [](const Accum& acc) {
        KindEval out;
        out.links = acc.links;
        if (acc.links > 0) {
            out.mean_rank = acc.rank_sum / static_cast<double>(acc.links);
            out.mean_rank_raw = acc.raw_rank_sum / static_cast<double>(acc.links);
            out.map = acc.ap_sum / static_cast<double>(acc.links);
        }
        return out;
    };

    EvalReport report;
    report.model = std::move(model_tag);
    const KindEval overall = finish(total);
    report.links = overall.links;
    report.mean_rank = overall.mean_rank;
    report.mean_rank_raw = overall.mean_rank_raw;
    report.map = overall.map;
    for (const auto& [kind, acc] : per_kind) {
        report.per_kind.emplace(kind, finish(acc));
    }
    return report;
}

struct PermutationTestResult {
    double observed_diff = 0.0;
    std::vector<double> permutation_diffs;
    double p_value = 1.0;
};

// observed = mean(a) - mean(b); each permutation reshuffles the pooled values
// into groups of the original sizes. One-sided add-one p-value:
// (1 + #{perm >= observed}) / (1 + permutations).
inline PermutationTestResult permutation_test(std::span<const double> group_a,
                                              std::span<const double> group_b,
                                              std::size_t permutations, std::uint64_t seed) {
    if (group_a.empty() || group_b.empty()) {
        throw std::invalid_argument("permutation_test: both groups must be nonempty");
    }
    const auto mean = [](std::span<const double> xs) {
        double s = 0.0;
        for (const double x : xs) {
            s += x;
        }
        return s / static_cast<double>(xs.size());
    };
    PermutationTestResult result;
    result.observed_diff = mean(group_a) - mean(group_b);

    std::vector<double> pooled;
    pooled.reserve(group_a.size() + group_b.size());
    pooled.insert(pooled.end(), group_a.begin(), group_a.end());
    pooled.insert(pooled.end(), group_b.begin(), group_b.end());

    std::mt19937_64 rng(seed);
    result.permutation_diffs.reserve(permutations);
    std::size_t at_least = 0;
    for (std::size_t i = 0; i < permutations; ++i) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        const double diff =
            mean({pooled.data(), group_a.size()}) -
            mean({pooled.data() + group_a.size(), group_b.size()});
        result.permutation_diffs.push_back(diff);
        if (diff >= result.observed_diff) {
            ++at_least;
        }
    }
    result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + permutations);
    return result;
}

}  // namespace hyprec
