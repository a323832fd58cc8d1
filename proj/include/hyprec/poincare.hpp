#pragma once
// Poincare-ball embedding training.
//
// Softmax negative-sampling loss over hyperbolic distances, Riemannian SGD
// (Euclidean gradient rescaled by (1-|x|^2)^2/4) with projection back into
// the eps-interior of the unit ball. Deterministic in single-threaded mode;
// optional lock-free multi-worker mode with unsynchronized updates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hyprec/embedding.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/graph.hpp"

namespace hyprec {

namespace detail {

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double sq_dist(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// arcosh(1 + t) without cancellation near t = 0.
inline double acosh1p(double t) { return std::log1p(t + std::sqrt(t * (t + 2.0))); }

// Guard for the arcosh argument; absorbs rounding for nearly coincident points.
inline constexpr double kMinAcoshArgOffset = 1e-15;

inline double poincare_distance_core(const double* u, const double* v, std::size_t n) {
    const double sq = sq_dist(u, v, n);
    if (sq == 0.0) {
        return 0.0;
    }
    const double au = std::max(1.0 - dot(u, u, n), 1e-12);
    const double av = std::max(1.0 - dot(v, v, n), 1e-12);
    const double t = std::max(2.0 * sq / (au * av), kMinAcoshArgOffset);
    return acosh1p(t);
}

}  // namespace detail

// Hyperbolic distance arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2))).
// Symmetric, nonnegative, zero exactly for identical points.
inline double poincare_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw structural_error("poincare_distance: rank mismatch (" + std::to_string(u.size()) +
                               " vs " + std::to_string(v.size()) + ")");
    }
    if (detail::dot(u.data(), u.data(), u.size()) >= 1.0 ||
        detail::dot(v.data(), v.data(), v.size()) >= 1.0) {
        throw std::domain_error("poincare_distance: points must lie strictly inside the unit ball");
    }
    return detail::poincare_distance_core(u.data(), v.data(), u.size());
}

// Rescales any point at or past norm 1 - eps back onto that shell.
inline void project_into_ball(std::span<double> p, double eps) {
    const double target = 1.0 - eps;
    double norm = std::sqrt(detail::dot(p.data(), p.data(), p.size()));
    if (norm < target) {
        return;
    }
    double scale = target / norm;
    for (int guard = 0; guard < 16; ++guard) {
        for (auto& c : p) {
            c *= scale;
        }
        norm = std::sqrt(detail::dot(p.data(), p.data(), p.size()));
        if (norm <= target) {
            return;
        }
        scale = (target / norm) * (1.0 - 1e-15);
    }
}

// One Riemannian SGD update: metric rescale, Euclidean step, ball projection.
inline void riemannian_step(std::span<double> point, std::span<const double> grad, double lr,
                            double ball_eps = 1e-5) {
    if (point.size() != grad.size()) {
        throw structural_error("riemannian_step: rank mismatch");
    }
    const double norm_sq = detail::dot(point.data(), point.data(), point.size());
    const double factor = 1.0 - norm_sq;
    const double scale = lr * factor * factor * 0.25;
    for (std::size_t i = 0; i < point.size(); ++i) {
        point[i] -= scale * grad[i];
    }
    project_into_ball(point, ball_eps);
}

struct TrainConfig {
    std::size_t rank = 15;
    std::size_t epochs = 50;
    double learning_rate = 0.1;
    std::size_t burn_in_epochs = 10;
    double burn_in_lr_factor = 0.1;
    std::size_t negatives_per_positive = 10;
    double init_scale = 1e-3;
    std::uint64_t rng_seed = 42;
    double ball_eps = 1e-5;
    std::size_t threads = 1;  // 1 = deterministic; >1 = lock-free hogwild
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.rank < 2) throw std::invalid_argument("train: rank must be >= 2");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
    if (cfg.negatives_per_positive < 1) throw std::invalid_argument("train: need >= 1 negative per positive");
    if (!(cfg.init_scale > 0.0) || !(cfg.init_scale < 0.01)) {
        throw std::invalid_argument("train: init_scale must lie in (0, 0.01)");
    }
    if (!(cfg.ball_eps > 0.0) || !(cfg.ball_eps < 0.5)) {
        throw std::invalid_argument("train: ball_eps must lie in (0, 0.5)");
    }
    if (cfg.threads < 1) throw std::invalid_argument("train: threads must be >= 1");
}

struct TrainStats {
    double final_loss = 0.0;               // mean loss per link, last epoch
    std::vector<double> epoch_loss;        // mean loss per link, each epoch
    std::uint64_t steps = 0;               // positive tuples processed
    std::uint64_t containment_violations = 0;  // norms found past 1 - eps after a step
};

struct TrainingTuple {
    EntityId parent;
    EntityId child;
    std::vector<EntityId> negatives;
};

namespace detail {

struct PoincareGeometry {
    double ball_eps = 1e-5;

    double distance(const double* u, const double* v, std::size_t n) const {
        return poincare_distance_core(u, v, n);
    }

    // Accumulates w * dd/du into gu and w * dd/dv into gv.
    void add_distance_grad(const double* u, const double* v, std::size_t n, double w, double* gu,
                           double* gv) const {
        const double sq = sq_dist(u, v, n);
        if (sq == 0.0) {
            return;  // flat bottom of the clamped distance
        }
        const double au = std::max(1.0 - dot(u, u, n), 1e-12);
        const double av = std::max(1.0 - dot(v, v, n), 1e-12);
        const double t = std::max(2.0 * sq / (au * av), kMinAcoshArgOffset);
        const double denom = std::sqrt(t * (t + 2.0));
        const double coef = 4.0 * w / (au * av * denom);
        const double cu = sq / au;
        const double cv = sq / av;
        for (std::size_t i = 0; i < n; ++i) {
            gu[i] += coef * ((u[i] - v[i]) + cu * u[i]);
            gv[i] += coef * ((v[i] - u[i]) + cv * v[i]);
        }
    }

    // Returns true when the updated point still violates containment.
    bool step(double* p, const double* g, double lr, std::size_t n) const {
        const double norm_sq = dot(p, p, n);
        const double factor = 1.0 - norm_sq;
        const double scale = lr * factor * factor * 0.25;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] -= scale * g[i];
        }
        std::span<double> span_p{p, n};
        project_into_ball(span_p, ball_eps);
        return std::sqrt(dot(p, p, n)) > 1.0 - ball_eps;
    }
};

struct CosineGeometry {
    static constexpr double kNormFloor = 1e-12;

    double distance(const double* u, const double* v, std::size_t n) const {
        const double nu = std::max(std::sqrt(dot(u, u, n)), kNormFloor);
        const double nv = std::max(std::sqrt(dot(v, v, n)), kNormFloor);
        return 1.0 - dot(u, v, n) / (nu * nv);
    }

    void add_distance_grad(const double* u, const double* v, std::size_t n, double w, double* gu,
                           double* gv) const {
        const double nu = std::max(std::sqrt(dot(u, u, n)), kNormFloor);
        const double nv = std::max(std::sqrt(dot(v, v, n)), kNormFloor);
        const double s = dot(u, v, n);
        const double cos_sim = s / (nu * nv);
        for (std::size_t i = 0; i < n; ++i) {
            gu[i] += w * (cos_sim * u[i] / (nu * nu) - v[i] / (nu * nv));
            gv[i] += w * (cos_sim * v[i] / (nv * nv) - u[i] / (nu * nv));
        }
    }

    bool step(double* p, const double* g, double lr, std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) {
            p[i] -= lr * g[i];
        }
        return false;
    }
};

// Gradient accumulator for the few points a tuple touches.
struct GradAccum {
    std::vector<std::size_t> ids;
    std::vector<double> grads;
    std::size_t rank = 0;

    void reset(std::size_t r) {
        rank = r;
        ids.clear();
        grads.clear();
    }

    double* at(std::size_t id) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == id) {
                return grads.data() + i * rank;
            }
        }
        ids.push_back(id);
        grads.resize(grads.size() + rank, 0.0);
        return grads.data() + (ids.size() - 1) * rank;
    }
};

// Loss and gradients for one positive tuple. candidates[0] is the true child.
template <class Geometry>
double tuple_loss_and_grad(const Geometry& geom, std::size_t rank, const double* coords,
                           std::size_t parent, std::span<const std::size_t> candidates,
                           GradAccum& accum, std::vector<double>& dist_scratch) {
    const double* u = coords + parent * rank;
    dist_scratch.clear();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (const std::size_t c : candidates) {
        const double d = geom.distance(u, coords + c * rank, rank);
        dist_scratch.push_back(d);
        max_neg = std::max(max_neg, -d);
    }
    double sum_exp = 0.0;
    for (const double d : dist_scratch) {
        sum_exp += std::exp(-d - max_neg);
    }
    const double lse = max_neg + std::log(sum_exp);
    const double loss = dist_scratch[0] + lse;
    // Reserve accumulator slots up front: at() may grow the buffer, which
    // would invalidate pointers fetched earlier in the same tuple.
    accum.at(parent);
    for (const std::size_t c : candidates) {
        accum.at(c);
    }
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double p_j = std::exp(-dist_scratch[j] - lse);
        const double w_j = (j == 0 ? 1.0 - p_j : -p_j);
        geom.add_distance_grad(u, coords + candidates[j] * rank, rank, w_j, accum.at(parent),
                               accum.at(candidates[j]));
    }
    return loss;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform negative sampling over entities that are not children of the parent
// (the parent itself is excluded as well).
struct NegativeSampler {
    std::size_t entity_count = 0;
    // Per parent index: sorted child indices, plus a precomputed complement
    // when the exclusion set covers most of the universe.
    std::vector<std::vector<std::size_t>> children;
    std::vector<std::vector<std::size_t>> complement;

    bool excluded(std::size_t parent, std::size_t candidate) const {
        if (candidate == parent) {
            return true;
        }
        const auto& ch = children[parent];
        return std::binary_search(ch.begin(), ch.end(), candidate);
    }

    template <class Rng>
    bool sample(std::size_t parent, std::size_t count, Rng& rng, std::vector<std::size_t>& out) const {
        out.clear();
        if (!complement[parent].empty()) {
            const auto& pool = complement[parent];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            for (std::size_t i = 0; i < count; ++i) {
                out.push_back(pool[pick(rng)]);
            }
            return true;
        }
        const std::size_t excluded_count = children[parent].size() + 1;
        if (excluded_count >= entity_count) {
            return false;  // nothing to contrast against
        }
        std::uniform_int_distribution<std::size_t> pick(0, entity_count - 1);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t candidate = pick(rng);
            while (excluded(parent, candidate)) {
                candidate = pick(rng);
            }
            out.push_back(candidate);
        }
        return true;
    }
};

template <class Geometry>
EmbeddingTable train_impl(const HierarchyGraph& graph, const TrainConfig& cfg,
                          const Geometry& geom, TrainStats* stats) {
    validate(cfg);
    if (graph.empty()) {
        throw std::invalid_argument("train: graph has no links");
    }
    const std::vector<EntityId> entities = graph.entities();
    const std::size_t n = entities.size();
    std::unordered_map<EntityId, std::size_t, EntityIdHash> index;
    index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        index.emplace(entities[i], i);
    }

    std::vector<std::pair<std::size_t, std::size_t>> links;
    links.reserve(graph.link_count());
    for (const auto& link : graph.links()) {
        links.emplace_back(index.at(link.parent), index.at(link.child));
    }

    NegativeSampler sampler;
    sampler.entity_count = n;
    sampler.children.resize(n);
    sampler.complement.resize(n);
    for (const auto& [p, c] : links) {
        sampler.children[p].push_back(c);
    }
    for (std::size_t p = 0; p < n; ++p) {
        auto& ch = sampler.children[p];
        std::sort(ch.begin(), ch.end());
        ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
        if ((ch.size() + 1) * 2 >= n) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i != p && !std::binary_search(ch.begin(), ch.end(), i)) {
                    sampler.complement[p].push_back(i);
                }
            }
        }
    }

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<double> coords(n * cfg.rank);
    {
        std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
        for (auto& c : coords) {
            c = init(rng);
        }
    }

    TrainStats local_stats;
    TrainStats& st = stats ? *stats : local_stats;
    st = TrainStats{};

    const auto run_chunk = [&](std::size_t begin, std::size_t end, std::mt19937_64& chunk_rng,
                               double lr, double& loss_sum, std::uint64_t& violations) {
        GradAccum accum;
        std::vector<double> dist_scratch;
        std::vector<std::size_t> candidates;
        for (std::size_t li = begin; li < end; ++li) {
            const auto [parent, child] = links[li];
            candidates.clear();
            candidates.push_back(child);
            std::vector<std::size_t> negs;
            if (!sampler.sample(parent, cfg.negatives_per_positive, chunk_rng, negs)) {
                continue;
            }
            candidates.insert(candidates.end(), negs.begin(), negs.end());
            accum.reset(cfg.rank);
            loss_sum += tuple_loss_and_grad(geom, cfg.rank, coords.data(), parent,
                                            candidates, accum, dist_scratch);
            for (std::size_t i = 0; i < accum.ids.size(); ++i) {
                const bool violated = geom.step(coords.data() + accum.ids[i] * cfg.rank,
                                                accum.grads.data() + i * cfg.rank, lr, cfg.rank);
                violations += violated ? 1 : 0;
            }
        }
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = epoch < cfg.burn_in_epochs
                              ? cfg.learning_rate * cfg.burn_in_lr_factor
                              : cfg.learning_rate;
        std::shuffle(links.begin(), links.end(), rng);
        double epoch_loss = 0.0;
        if (cfg.threads <= 1) {
            run_chunk(0, links.size(), rng, lr, epoch_loss, st.containment_violations);
        } else {
            std::vector<std::thread> workers;
            std::vector<double> losses(cfg.threads, 0.0);
            std::vector<std::uint64_t> violations(cfg.threads, 0);
            const std::size_t chunk = (links.size() + cfg.threads - 1) / cfg.threads;
            for (std::size_t t = 0; t < cfg.threads; ++t) {
                const std::size_t begin = std::min(t * chunk, links.size());
                const std::size_t end = std::min(begin + chunk, links.size());
                workers.emplace_back([&, t, begin, end] {
                    std::mt19937_64 worker_rng(mix_seed(cfg.rng_seed, epoch, t));
                    run_chunk(begin, end, worker_rng, lr, losses[t], violations[t]);
                });
            }
            for (auto& w : workers) {
                w.join();
            }
            for (std::size_t t = 0; t < cfg.threads; ++t) {
                epoch_loss += losses[t];
                st.containment_violations += violations[t];
            }
        }
        st.steps += links.size();
        st.epoch_loss.push_back(epoch_loss / static_cast<double>(links.size()));
    }
    st.final_loss = st.epoch_loss.empty() ? 0.0 : st.epoch_loss.back();

    EmbeddingTable table(cfg.rank);
    for (std::size_t i = 0; i < n; ++i) {
        table.insert(entities[i], {coords.data() + i * cfg.rank, cfg.rank});
    }
    return table;
}

// EntityId-level loss/gradient shared by the public inspection APIs.
template <class Geometry>
std::pair<double, std::unordered_map<EntityId, std::vector<double>, EntityIdHash>>
batch_loss_and_gradient(const Geometry& geom, std::span<const TrainingTuple> batch,
                        const EmbeddingTable& table) {
    const std::size_t rank = table.rank();
    std::vector<EntityId> ids;
    std::unordered_map<EntityId, std::size_t, EntityIdHash> index;
    std::vector<double> coords;
    const auto intern = [&](const EntityId& id) {
        const auto [it, inserted] = index.try_emplace(id, ids.size());
        if (inserted) {
            ids.push_back(id);
            const auto p = table.point(id);
            coords.insert(coords.end(), p.begin(), p.end());
        }
        return it->second;
    };
    double total = 0.0;
    GradAccum accum;
    accum.reset(rank);
    std::vector<double> dist_scratch;
    std::vector<std::size_t> candidates;
    for (const auto& tuple : batch) {
        const std::size_t parent = intern(tuple.parent);
        candidates.clear();
        candidates.push_back(intern(tuple.child));
        for (const auto& neg : tuple.negatives) {
            candidates.push_back(intern(neg));
        }
        total += tuple_loss_and_grad(geom, rank, coords.data(), parent, candidates, accum,
                                     dist_scratch);
    }
    std::unordered_map<EntityId, std::vector<double>, EntityIdHash> grads;
    for (std::size_t i = 0; i < accum.ids.size(); ++i) {
        const double* g = accum.grads.data() + i * rank;
        grads.emplace(ids[accum.ids[i]], std::vector<double>(g, g + rank));
    }
    return {total, std::move(grads)};
}

}  // namespace detail

using GradientMap = std::unordered_map<EntityId, std::vector<double>, EntityIdHash>;

// Total batch loss and exact ambient (Euclidean) gradients per touched entity,
// for the softmax negative-sampling loss over hyperbolic distances.
inline std::pair<double, GradientMap> loss_and_gradient(std::span<const TrainingTuple> batch,
                                                        const EmbeddingTable& table) {
    return detail::batch_loss_and_gradient(detail::PoincareGeometry{}, batch, table);
}

// Trains embeddings for every entity of the graph inside the unit ball.
inline EmbeddingTable train(const HierarchyGraph& graph, const TrainConfig& cfg,
                            TrainStats* stats = nullptr) {
    return detail::train_impl(graph, cfg, detail::PoincareGeometry{cfg.ball_eps}, stats);
}

// Checks every point against the ball-interior invariant.
inline bool table_in_ball(const EmbeddingTable& table, double ball_eps = 1e-5) {
    for (const auto& id : table.entities()) {
        const auto p = table.point(id);
        if (std::sqrt(detail::dot(p.data(), p.data(), p.size())) > 1.0 - ball_eps) {
            return false;
        }
    }
    return true;
}

}  // namespace hyprec
