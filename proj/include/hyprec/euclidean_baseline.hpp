#pragma once
// Euclidean ablation baseline: the same link set, loss shape, and training
// loop as the ball embedder, but unconstrained points with cosine affinity.
// Retrieval against this table uses cosine distance.

#include <span>

#include "hyprec/poincare.hpp"

namespace hyprec {

// 1 - cos(u, v); norms floored at 1e-12.
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw structural_error("cosine_distance: rank mismatch (" + std::to_string(u.size()) +
                               " vs " + std::to_string(v.size()) + ")");
    }
    return detail::CosineGeometry{}.distance(u.data(), v.data(), u.size());
}

inline std::pair<double, GradientMap> cosine_loss_and_gradient(
    std::span<const TrainingTuple> batch, const EmbeddingTable& table) {
    return detail::batch_loss_and_gradient(detail::CosineGeometry{}, batch, table);
}

inline EmbeddingTable euclidean_baseline_train(const HierarchyGraph& graph, const TrainConfig& cfg,
                                               TrainStats* stats = nullptr) {
    return detail::train_impl(graph, cfg, detail::CosineGeometry{}, stats);
}

}  // namespace hyprec
