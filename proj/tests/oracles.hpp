#pragma once
// Test-side oracles, independent of the library's implementation paths:
// trapezoid CDF integration for quantile checks, central finite differences
// for gradients, brute-force retrieval, and shared fixtures.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hyprec/embedding.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/graph.hpp"
#include "hyprec/recommender.hpp"

namespace oracles {

// CDF of an unnormalized density on [lo, x] via trapezoid integration,
// normalized by the full integral over [lo, hi].
class TrapezoidCdf {
public:
    TrapezoidCdf(std::function<double(double)> density, double lo, double hi,
                 std::size_t panels = 2'000'000)
        : density_(std::move(density)), lo_(lo), hi_(hi), panels_(panels) {
        total_ = integrate(hi_);
    }

    double cdf(double x) const { return integrate(x) / total_; }

    // Inverts the trapezoid CDF by bisection.
    double quantile(double q, int iters = 200) const {
        double lo = lo_;
        double hi = hi_;
        for (int i = 0; i < iters; ++i) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < q ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    double integrate(double x) const {
        const std::size_t n = panels_;
        const double h = (x - lo_) / static_cast<double>(n);
        double sum = 0.5 * (density_(lo_) + density_(x));
        for (std::size_t i = 1; i < n; ++i) {
            sum += density_(lo_ + h * static_cast<double>(i));
        }
        return sum * h;
    }

    std::function<double(double)> density_;
    double lo_;
    double hi_;
    std::size_t panels_;
    double total_;
};

inline TrapezoidCdf beta_density_cdf(double a, double b, std::size_t panels = 400'000) {
    // Endpoints nudged inward to keep a<1 or b<1 densities finite.
    return TrapezoidCdf(
        [a, b](double x) { return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0); }, 1e-12,
        1.0 - 1e-12, panels);
}

inline TrapezoidCdf gamma_density_cdf(double shape, double rate, std::size_t panels = 400'000) {
    const double hi = (shape + 40.0 * std::sqrt(shape) + 40.0) / rate;
    return TrapezoidCdf(
        [shape, rate](double x) { return std::pow(x, shape - 1.0) * std::exp(-rate * x); }, 1e-12,
        hi, panels);
}

// Central finite difference of a scalar function of one coordinate.
template <class Fn>
double central_difference(Fn&& fn, double& coord, double step) {
    const double saved = coord;
    coord = saved + step;
    const double up = fn();
    coord = saved - step;
    const double down = fn();
    coord = saved;
    return (up - down) / (2.0 * step);
}

// Full-sort retrieval oracle with the recommender's tie-break.
inline std::vector<hyprec::RankedResult> brute_force_recommend(const hyprec::EmbeddingTable& table,
                                                               const hyprec::Query& query,
                                                               hyprec::Metric metric) {
    std::vector<hyprec::RankedResult> all;
    for (const auto& id : table.entities()) {
        if (id.kind != query.target_kind) {
            continue;
        }
        bool is_seed = false;
        for (const auto& seed : query.seeds) {
            is_seed = is_seed || seed == id;
        }
        if (query.exclude_seeds && is_seed) {
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& seed : query.seeds) {
            best = std::min(best, hyprec::metric_distance(metric, table.point(seed), table.point(id)));
        }
        all.push_back({id, best});
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        if (x.distance != y.distance) {
            return x.distance < y.distance;
        }
        return x.entity.key < y.entity.key;
    });
    if (all.size() > query.k) {
        all.resize(query.k);
    }
    return all;
}

// Balanced tree: 1 root, `branching` internals, branching^2 leaves, all
// artists joined by parent->child artist links.
struct ToyTree {
    hyprec::HierarchyGraph graph;
    hyprec::EntityId root;
    std::vector<hyprec::EntityId> internals;
    std::vector<hyprec::EntityId> leaves;
};

inline ToyTree balanced_tree(std::size_t branching = 5) {
    using namespace hyprec;
    ToyTree tree;
    tree.root = make_entity(EntityKind::Artist, "root");
    for (std::size_t i = 0; i < branching; ++i) {
        const EntityId internal = make_entity(EntityKind::Artist, "i" + std::to_string(i));
        tree.internals.push_back(internal);
        tree.graph.add(tree.root, internal, LinkKind::ArtistToArtist);
        for (std::size_t j = 0; j < branching; ++j) {
            const EntityId leaf =
                make_entity(EntityKind::Artist, "l" + std::to_string(i) + "_" + std::to_string(j));
            tree.leaves.push_back(leaf);
            tree.graph.add(internal, leaf, LinkKind::ArtistToArtist);
        }
    }
    return tree;
}

// Three-level synthetic catalog exercising all six link kinds:
// 4 formats, 20 stations, 5 genres, 50 artists, 450 tracks (529 entities).
inline hyprec::HierarchyGraph synthetic_catalog() {
    using namespace hyprec;
    HierarchyGraph graph;
    const auto format = [](std::size_t i) { return make_entity(EntityKind::Format, "f" + std::to_string(i)); };
    const auto station = [](std::size_t i) { return make_entity(EntityKind::LiveStation, "s" + std::to_string(i)); };
    const auto genre = [](std::size_t i) { return make_entity(EntityKind::Genre, "g" + std::to_string(i)); };
    const auto artist = [](std::size_t i) { return make_entity(EntityKind::Artist, "a" + std::to_string(i)); };
    const auto track = [](std::size_t i) { return make_entity(EntityKind::Track, "t" + std::to_string(i)); };

    for (std::size_t s = 0; s < 20; ++s) {
        graph.add(format(s % 4), station(s), LinkKind::FormatToStation);
    }
    for (std::size_t a = 0; a < 50; ++a) {
        graph.add(genre(a % 5), artist(a), LinkKind::GenreToArtist);
        for (std::size_t t = 0; t < 9; ++t) {
            graph.add(artist(a), track(a * 9 + t), LinkKind::ArtistToTrack);
        }
        for (std::size_t step : {5, 10, 15}) {
            graph.add(artist(a), artist((a + step) % 50), LinkKind::ArtistToArtist);
        }
    }
    std::mt19937_64 rng(7);
    for (std::size_t s = 0; s < 20; ++s) {
        // Stations favor artists from two genres tied to their format.
        std::vector<std::size_t> pool;
        for (std::size_t a = 0; a < 50; ++a) {
            if (a % 5 == s % 4 || a % 5 == (s % 4 + 1) % 5) {
                pool.push_back(a);
            }
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t i = 0; i < 8; ++i) {
            graph.add(station(s), artist(pool[i]), LinkKind::StationToArtist);
        }
        std::vector<std::size_t> track_pool;
        for (const std::size_t a : pool) {
            for (std::size_t t = 0; t < 9; ++t) {
                track_pool.push_back(a * 9 + t);
            }
        }
        std::shuffle(track_pool.begin(), track_pool.end(), rng);
        for (std::size_t i = 0; i < 30; ++i) {
            graph.add(station(s), track(track_pool[i]), LinkKind::StationToTrack);
        }
    }
    return graph;
}

// Temp directory scoped to one test.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("hyprec_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace oracles
