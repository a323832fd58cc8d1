#pragma once
// Turns posterior scores into the six directed link sets and assembles the
// pruned hierarchy graph.
//
// Behavioral links (artist/station -> track/child-artist) keep only children
// scoring strictly above the per-station 75th percentile; dimensional links
// (genre -> artist, format -> station) are emitted unconditionally.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hyprec/empirical_bayes.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/graph.hpp"

namespace hyprec {

struct ScoredChild {
    EntityId child;
    double score = 0.0;  // lower credible bound of the posterior
};

struct StationScores {
    EntityId station;  // Artist for custom stations, LiveStation for broadcast
    std::vector<ScoredChild> track_scores;
    std::vector<ScoredChild> artist_scores;
    std::size_t unknown_artist_tracks = 0;  // skipped during child-artist attribution
};

// Exactly one label per entity: an artist's primary genre or a live station's
// programming format.
struct DimensionalRecord {
    EntityId entity;
    EntityId label;
};

using TrackArtistMap = std::unordered_map<EntityId, EntityId, EntityIdHash>;

// Linear interpolation between closest order statistics (the common "type 7"
// definition). values need not be sorted; level in [0, 1].
inline double interpolated_quantile(std::vector<double> values, double level) {
    if (values.empty()) {
        throw std::invalid_argument("interpolated_quantile: empty input");
    }
    if (!(level >= 0.0) || !(level <= 1.0)) {
        throw std::domain_error("interpolated_quantile: level must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * level;
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= values.size()) {
        return values.back();
    }
    const double frac = h - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

// Children scoring strictly above the interpolated percentile of their own
// list. May be empty (all scores equal, or a single child). Level 0 is the
// no-threshold boundary: every child is kept.
inline std::vector<ScoredChild> top_quartile(const std::vector<ScoredChild>& children,
                                             double level = 0.75) {
    if (children.empty()) {
        throw std::invalid_argument("top_quartile: empty input");
    }
    if (level <= 0.0) {
        return children;
    }
    std::vector<double> scores;
    scores.reserve(children.size());
    for (const auto& c : children) {
        scores.push_back(c.score);
    }
    const double threshold = interpolated_quantile(std::move(scores), level);
    std::vector<ScoredChild> out;
    for (const auto& c : children) {
        if (c.score > threshold) {
            out.push_back(c);
        }
    }
    return out;
}

namespace detail {

template <class Obs, class Prior, class Posterior>
StationScores score_station_impl(const EntityId& station, const Prior& prior,
                                 std::span<const Obs> observations,
                                 const TrackArtistMap& authorship, double quantile_alpha,
                                 Posterior (*update)(const Prior&, const Obs&),
                                 double (*quantile)(const Posterior&, double)) {
    if (observations.empty()) {
        throw std::invalid_argument("score_station: no observations for " + to_string(station));
    }
    if (!(quantile_alpha > 0.0) || !(quantile_alpha < 1.0)) {
        throw std::domain_error("score_station: quantile alpha must lie in (0, 1)");
    }
    StationScores result;
    result.station = station;
    std::unordered_map<EntityId, double, EntityIdHash> artist_sums;
    for (const auto& obs : observations) {
        const double score = quantile(update(prior, obs), quantile_alpha);
        result.track_scores.push_back({obs.child, score});
        const auto it = authorship.find(obs.child);
        if (it == authorship.end()) {
            ++result.unknown_artist_tracks;
            continue;
        }
        // Custom stations attribute child tracks to the seed artist; the seed
        // itself is never its own child artist.
        if (station.kind == EntityKind::Artist && it->second == station) {
            continue;
        }
        artist_sums[it->second] += score;
    }
    for (const auto& [artist, sum] : artist_sums) {
        result.artist_scores.push_back({artist, sum});
    }
    const auto by_child = [](const ScoredChild& a, const ScoredChild& b) {
        return a.child < b.child;
    };
    std::sort(result.track_scores.begin(), result.track_scores.end(), by_child);
    std::sort(result.artist_scores.begin(), result.artist_scores.end(), by_child);
    return result;
}

}  // namespace detail

// Scores every track of a custom artist station: 0.05-quantile (by default) of
// the beta posterior per track, child-artist scores as per-artist sums.
inline StationScores score_station(const EntityId& station, const BetaPrior& prior,
                                   std::span<const BinomialObs> observations,
                                   const TrackArtistMap& authorship,
                                   double quantile_alpha = 0.05) {
    return detail::score_station_impl<BinomialObs, BetaPrior, BetaPosterior>(
        station, prior, observations, authorship, quantile_alpha, &beta_update, &beta_quantile);
}

// Broadcast-station variant over the gamma posterior.
inline StationScores score_station(const EntityId& station, const GammaPrior& prior,
                                    std::span<const PoissonObs> observations,
                                    const TrackArtistMap& authorship,
                                    double quantile_alpha = 0.05) {
    return detail::score_station_impl<PoissonObs, GammaPrior, GammaPosterior>(
        station, prior, observations, authorship, quantile_alpha, &gamma_update, &gamma_quantile);
}

struct LinkBuildOptions {
    double quartile_level = 0.75;
    std::size_t prune_min_links = 20;
};

// All six link kinds, before pruning.
inline HierarchyGraph assemble_links(std::span<const StationScores> stations,
                                     std::span<const DimensionalRecord> dims,
                                     double quartile_level = 0.75) {
    HierarchyGraph graph;
    for (const auto& station : stations) {
        LinkKind track_kind;
        LinkKind artist_kind;
        if (station.station.kind == EntityKind::Artist) {
            track_kind = LinkKind::ArtistToTrack;
            artist_kind = LinkKind::ArtistToArtist;
        } else if (station.station.kind == EntityKind::LiveStation) {
            track_kind = LinkKind::StationToTrack;
            artist_kind = LinkKind::StationToArtist;
        } else {
            throw structural_error("station must be an artist or live_station, got " +
                                   to_string(station.station));
        }
        if (!station.track_scores.empty()) {
            for (const auto& child : top_quartile(station.track_scores, quartile_level)) {
                graph.add(station.station, child.child, track_kind);
            }
        }
        if (!station.artist_scores.empty()) {
            for (const auto& child : top_quartile(station.artist_scores, quartile_level)) {
                graph.add(station.station, child.child, artist_kind);
            }
        }
    }
    for (const auto& dim : dims) {
        if (dim.label.kind == EntityKind::Genre && dim.entity.kind == EntityKind::Artist) {
            graph.add(dim.label, dim.entity, LinkKind::GenreToArtist);
        } else if (dim.label.kind == EntityKind::Format &&
                   dim.entity.kind == EntityKind::LiveStation) {
            graph.add(dim.label, dim.entity, LinkKind::FormatToStation);
        } else {
            throw structural_error("dimensional record must pair (artist, genre) or "
                                   "(live_station, format), got (" +
                                   std::string(to_string(dim.entity.kind)) + ", " +
                                   std::string(to_string(dim.label.kind)) + ")");
        }
    }
    return graph;
}

inline HierarchyGraph build_links(std::span<const StationScores> stations,
                                  std::span<const DimensionalRecord> dims,
                                  const LinkBuildOptions& options = {}) {
    return assemble_links(stations, dims, options.quartile_level).pruned(options.prune_min_links);
}

}  // namespace hyprec
