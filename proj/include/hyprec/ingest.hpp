#pragma once
// JSONL ingestion of play-log data: spin records per broadcast station,
// completion records per custom artist station, and dimensional labels.
// Malformed lines are rejected with file:line diagnostics; observations are
// grouped per station and sorted canonically.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "hyprec/empirical_bayes.hpp"
#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/link_builder.hpp"

namespace hyprec {

struct SpinRecord {
    std::string station;
    std::string track;
    std::string artist;
    std::int64_t spins = 0;
    std::int64_t days_presented = 1;
};

struct CompletionRecord {
    std::string seed_artist;
    std::string track;
    std::string track_artist;
    std::int64_t starts = 0;
    std::int64_t completions = 0;
};

struct BinomialGroup {
    EntityId station;  // custom artist station
    std::vector<BinomialObs> observations;
    TrackArtistMap authorship;
};

struct PoissonGroup {
    EntityId station;  // broadcast live station
    std::vector<PoissonObs> observations;
    TrackArtistMap authorship;
};

struct IngestOptions {
    std::int64_t lookback_cap_days = 183;  // six-month window
};

struct IngestResult {
    std::vector<BinomialGroup> binomial_groups;  // sorted by station
    std::vector<PoissonGroup> poisson_groups;    // sorted by station
    std::vector<DimensionalRecord> dims;
    std::map<EntityKind, std::size_t> entity_counts;
    std::size_t spin_records = 0;
    std::size_t completion_records = 0;
    std::size_t dim_records = 0;
};

// A group supports a marginal-MLE prior fit when it has enough observations
// with nonzero variance in the empirical rates.
inline bool fittable(const BinomialGroup& group) {
    return detail::beta_fit_defect(group.observations).empty();
}

inline bool fittable(const PoissonGroup& group) {
    return detail::gamma_fit_defect(group.observations).empty();
}

namespace detail {

class LineErrors {
public:
    void add(const std::filesystem::path& file, std::size_t line, const std::string& what) {
        ++count_;
        if (messages_.size() < 20) {
            messages_.push_back(file.filename().string() + ":" + std::to_string(line) + ": " + what);
        }
    }

    void raise_if_any() const {
        if (count_ == 0) {
            return;
        }
        std::string joined;
        for (const auto& m : messages_) {
            joined += "\n  ";
            joined += m;
        }
        if (count_ > messages_.size()) {
            joined += "\n  ... and " + std::to_string(count_ - messages_.size()) + " more";
        }
        throw validation_error("ingest rejected " + std::to_string(count_) + " line(s):" + joined);
    }

private:
    std::size_t count_ = 0;
    std::vector<std::string> messages_;
};

inline std::int64_t require_count(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) {
        throw validation_error(std::string("missing field \"") + field + "\"");
    }
    const auto& v = j.at(field);
    if (!v.is_number_integer()) {
        throw validation_error(std::string("field \"") + field + "\" must be an integer");
    }
    return v.get<std::int64_t>();
}

inline std::string require_key(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string() || j.at(field).get<std::string>().empty()) {
        throw validation_error(std::string("field \"") + field + "\" must be a nonempty string");
    }
    return j.at(field).get<std::string>();
}

template <class Fn>
void for_each_jsonl_line(const std::filesystem::path& file, LineErrors& errors, Fn&& fn) {
    std::ifstream in(file);
    if (!in) {
        throw validation_error("cannot open input file " + file.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            fn(nlohmann::json::parse(line), line_no);
        } catch (const nlohmann::json::exception& e) {
            errors.add(file, line_no, std::string("invalid JSON: ") + e.what());
        } catch (const validation_error& e) {
            errors.add(file, line_no, e.what());
        }
    }
}

}  // namespace detail

inline IngestResult ingest(const std::filesystem::path& spin_file,
                           const std::filesystem::path& completion_file,
                           const std::filesystem::path& dims_file,
                           const IngestOptions& options = {}) {
    detail::LineErrors errors;
    IngestResult result;

    std::unordered_map<EntityId, EntityId, EntityIdHash> authorship;  // track -> artist, global
    const auto record_author = [&](const EntityId& track, const EntityId& artist) {
        const auto [it, inserted] = authorship.try_emplace(track, artist);
        if (!inserted && it->second != artist) {
            throw validation_error("track " + to_string(track) + " already attributed to " +
                                   to_string(it->second) + ", now " + to_string(artist));
        }
    };

    std::map<EntityId, PoissonGroup> poisson;
    std::unordered_map<EntityId, std::unordered_set<EntityId, EntityIdHash>, EntityIdHash> seen_tracks;
    detail::for_each_jsonl_line(spin_file, errors, [&](const nlohmann::json& j, std::size_t) {
        SpinRecord rec;
        rec.station = detail::require_key(j, "station");
        rec.track = detail::require_key(j, "track");
        rec.artist = detail::require_key(j, "artist");
        rec.spins = detail::require_count(j, "spins");
        rec.days_presented = detail::require_count(j, "days_presented");
        if (rec.days_presented < 1) {
            throw validation_error("days_presented < 1");
        }
        if (rec.days_presented > options.lookback_cap_days) {
            throw validation_error("days_presented " + std::to_string(rec.days_presented) +
                                   " exceeds the lookback window cap " +
                                   std::to_string(options.lookback_cap_days));
        }
        if (rec.spins < 0) {
            throw validation_error("spins < 0");
        }
        const EntityId station = make_entity(EntityKind::LiveStation, rec.station);
        const EntityId track = make_entity(EntityKind::Track, rec.track);
        const EntityId artist = make_entity(EntityKind::Artist, rec.artist);
        record_author(track, artist);
        if (!seen_tracks[station].insert(track).second) {
            throw validation_error("duplicate (station, track) observation; input must be "
                                   "pre-aggregated");
        }
        auto& group = poisson[station];
        group.station = station;
        group.observations.push_back({track, rec.spins, rec.days_presented});
        group.authorship.emplace(track, artist);
        ++result.spin_records;
    });

    std::map<EntityId, BinomialGroup> binomial;
    detail::for_each_jsonl_line(completion_file, errors, [&](const nlohmann::json& j, std::size_t) {
        CompletionRecord rec;
        rec.seed_artist = detail::require_key(j, "seed_artist");
        rec.track = detail::require_key(j, "track");
        rec.track_artist = detail::require_key(j, "track_artist");
        rec.starts = detail::require_count(j, "starts");
        rec.completions = detail::require_count(j, "completions");
        if (rec.starts < 0) {
            throw validation_error("starts < 0");
        }
        if (rec.completions < 0 || rec.completions > rec.starts) {
            throw validation_error("completions > starts");
        }
        const EntityId station = make_entity(EntityKind::Artist, rec.seed_artist);
        const EntityId track = make_entity(EntityKind::Track, rec.track);
        const EntityId artist = make_entity(EntityKind::Artist, rec.track_artist);
        record_author(track, artist);
        if (!seen_tracks[station].insert(track).second) {
            throw validation_error("duplicate (station, track) observation; input must be "
                                   "pre-aggregated");
        }
        auto& group = binomial[station];
        group.station = station;
        group.observations.push_back({track, rec.starts, rec.completions});
        group.authorship.emplace(track, artist);
        ++result.completion_records;
    });

    std::unordered_map<EntityId, EntityId, EntityIdHash> labels;
    detail::for_each_jsonl_line(dims_file, errors, [&](const nlohmann::json& j, std::size_t) {
        const EntityId entity = parse_entity(detail::require_key(j, "entity"));
        const EntityId label = parse_entity(detail::require_key(j, "label"));
        const bool artist_genre =
            entity.kind == EntityKind::Artist && label.kind == EntityKind::Genre;
        const bool station_format =
            entity.kind == EntityKind::LiveStation && label.kind == EntityKind::Format;
        if (!artist_genre && !station_format) {
            throw validation_error("dimensional record must pair (artist, genre) or "
                                   "(live_station, format)");
        }
        const auto [it, inserted] = labels.try_emplace(entity, label);
        if (!inserted && it->second != label) {
            throw validation_error("entity " + to_string(entity) + " already labeled " +
                                   to_string(it->second) + ", now " + to_string(label));
        }
        ++result.dim_records;
    });
    errors.raise_if_any();

    for (auto& [station, group] : poisson) {
        std::sort(group.observations.begin(), group.observations.end(),
                  [](const PoissonObs& a, const PoissonObs& b) { return a.child < b.child; });
        result.poisson_groups.push_back(std::move(group));
    }
    for (auto& [station, group] : binomial) {
        std::sort(group.observations.begin(), group.observations.end(),
                  [](const BinomialObs& a, const BinomialObs& b) { return a.child < b.child; });
        result.binomial_groups.push_back(std::move(group));
    }
    {
        std::vector<std::pair<EntityId, EntityId>> sorted_labels(labels.begin(), labels.end());
        std::sort(sorted_labels.begin(), sorted_labels.end());
        for (auto& [entity, label] : sorted_labels) {
            result.dims.push_back({entity, label});
        }
    }

    std::unordered_set<EntityId, EntityIdHash> distinct;
    const auto note = [&](const EntityId& id) {
        if (distinct.insert(id).second) {
            ++result.entity_counts[id.kind];
        }
    };
    for (const auto& group : result.poisson_groups) {
        note(group.station);
        for (const auto& obs : group.observations) {
            note(obs.child);
        }
        for (const auto& [track, artist] : group.authorship) {
            note(artist);
        }
    }
    for (const auto& group : result.binomial_groups) {
        note(group.station);
        for (const auto& obs : group.observations) {
            note(obs.child);
        }
        for (const auto& [track, artist] : group.authorship) {
            note(artist);
        }
    }
    for (const auto& dim : result.dims) {
        note(dim.entity);
        note(dim.label);
    }
    return result;
}

}  // namespace hyprec
