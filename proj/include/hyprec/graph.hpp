#pragma once
// Typed entity universe and the directed hierarchy graph.
//
// Six link kinds over five entity kinds; each link kind fixes its
// (parent kind, child kind) pair. Links are unweighted and deduplicated.
// Entities exist only while they appear in at least one link.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"

namespace hyprec {

enum class LinkKind : std::uint8_t {
    ArtistToTrack,
    ArtistToArtist,
    GenreToArtist,
    StationToTrack,
    StationToArtist,
    FormatToStation,
};

inline constexpr std::size_t kLinkKindCount = 6;

struct LinkKindPair {
    EntityKind parent;
    EntityKind child;
};

inline constexpr LinkKindPair kind_pair(LinkKind kind) {
    switch (kind) {
        case LinkKind::ArtistToTrack: return {EntityKind::Artist, EntityKind::Track};
        case LinkKind::ArtistToArtist: return {EntityKind::Artist, EntityKind::Artist};
        case LinkKind::GenreToArtist: return {EntityKind::Genre, EntityKind::Artist};
        case LinkKind::StationToTrack: return {EntityKind::LiveStation, EntityKind::Track};
        case LinkKind::StationToArtist: return {EntityKind::LiveStation, EntityKind::Artist};
        case LinkKind::FormatToStation: return {EntityKind::Format, EntityKind::LiveStation};
    }
    return {EntityKind::Format, EntityKind::Format};
}

inline constexpr std::string_view to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::ArtistToTrack: return "artist_to_track";
        case LinkKind::ArtistToArtist: return "artist_to_artist";
        case LinkKind::GenreToArtist: return "genre_to_artist";
        case LinkKind::StationToTrack: return "station_to_track";
        case LinkKind::StationToArtist: return "station_to_artist";
        case LinkKind::FormatToStation: return "format_to_station";
    }
    return "?";
}

inline std::optional<LinkKind> parse_link_kind(std::string_view s) {
    if (s == "artist_to_track") return LinkKind::ArtistToTrack;
    if (s == "artist_to_artist") return LinkKind::ArtistToArtist;
    if (s == "genre_to_artist") return LinkKind::GenreToArtist;
    if (s == "station_to_track") return LinkKind::StationToTrack;
    if (s == "station_to_artist") return LinkKind::StationToArtist;
    if (s == "format_to_station") return LinkKind::FormatToStation;
    return std::nullopt;
}

struct DirectedLink {
    EntityId parent;
    EntityId child;
    LinkKind kind{LinkKind::ArtistToTrack};

    bool operator==(const DirectedLink&) const = default;
    auto operator<=>(const DirectedLink&) const = default;
};

// Throws structural_error unless the link matches its kind's fixed pair
// and is not a self-link.
inline void validate_link(const DirectedLink& link) {
    const auto pair = kind_pair(link.kind);
    if (link.parent.kind != pair.parent || link.child.kind != pair.child) {
        std::ostringstream msg;
        msg << "link kind " << to_string(link.kind) << " requires (" << to_string(pair.parent)
            << " -> " << to_string(pair.child) << "), got (" << to_string(link.parent.kind)
            << " -> " << to_string(link.child.kind) << ")";
        throw structural_error(msg.str());
    }
    if (link.parent == link.child) {
        throw structural_error("self-link not allowed: " + to_string(link.parent));
    }
}

struct DirectedLinkHash {
    std::size_t operator()(const DirectedLink& l) const noexcept {
        const EntityIdHash h;
        std::size_t seed = h(l.parent);
        seed ^= h(l.child) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        seed ^= static_cast<std::size_t>(l.kind) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        return seed;
    }
};

class HierarchyGraph {
public:
    using Edge = std::pair<LinkKind, EntityId>;

    // Idempotent insert; validates the kind pair.
    void add(const DirectedLink& link) {
        validate_link(link);
        if (!seen_.insert(link).second) {
            return;
        }
        links_.push_back(link);
        degree_[link.parent] += 1;
        degree_[link.child] += 1;
        out_[link.parent].emplace_back(link.kind, link.child);
        in_[link.child].emplace_back(link.kind, link.parent);
    }

    void add(const EntityId& parent, const EntityId& child, LinkKind kind) {
        add(DirectedLink{parent, child, kind});
    }

    bool contains(const DirectedLink& link) const { return seen_.contains(link); }

    // Total incident link count, both directions, all kinds; 0 for absent entities.
    std::size_t degree(const EntityId& entity) const {
        const auto it = degree_.find(entity);
        return it == degree_.end() ? 0 : it->second;
    }

    const std::vector<DirectedLink>& links() const { return links_; }
    std::size_t link_count() const { return links_.size(); }
    std::size_t entity_count() const { return degree_.size(); }
    bool empty() const { return links_.empty(); }

    const std::vector<Edge>& children_of(const EntityId& parent) const {
        static const std::vector<Edge> kEmpty;
        const auto it = out_.find(parent);
        return it == out_.end() ? kEmpty : it->second;
    }

    const std::vector<Edge>& parents_of(const EntityId& child) const {
        static const std::vector<Edge> kEmpty;
        const auto it = in_.find(child);
        return it == in_.end() ? kEmpty : it->second;
    }

    // Entities appearing in at least one link, sorted by (kind, key).
    std::vector<EntityId> entities() const {
        std::vector<EntityId> out;
        out.reserve(degree_.size());
        for (const auto& [id, _] : degree_) {
            out.push_back(id);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    // Single pruning pass: degrees are taken on this graph, every entity below
    // min_links is dropped together with its incident links. Not iterated to a
    // fixed point, so post-prune degrees may fall below the threshold.
    HierarchyGraph pruned(std::size_t min_links = 20) const {
        HierarchyGraph result;
        for (const auto& link : links_) {
            if (degree(link.parent) >= min_links && degree(link.child) >= min_links) {
                result.add(link);
            }
        }
        return result;
    }

    // One link per line: parent_kind:parent_key <TAB> child_kind:child_key <TAB> link_kind.
    // Canonical (sorted) order for byte-stable reruns.
    void save_tsv(std::ostream& os) const {
        std::vector<DirectedLink> sorted = links_;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& link : sorted) {
            os << to_string(link.parent) << '\t' << to_string(link.child) << '\t'
               << to_string(link.kind) << '\n';
        }
    }

    static HierarchyGraph load_tsv(std::istream& is) {
        HierarchyGraph graph;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) {
                continue;
            }
            const auto tab1 = line.find('\t');
            const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
            if (tab2 == std::string::npos) {
                throw validation_error("links tsv line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
            }
            const auto kind = parse_link_kind(std::string_view(line).substr(tab2 + 1));
            if (!kind) {
                throw validation_error("links tsv line " + std::to_string(line_no) + ": unknown link kind");
            }
            graph.add(parse_entity(std::string_view(line).substr(0, tab1)),
                      parse_entity(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1)), *kind);
        }
        return graph;
    }

private:
    std::vector<DirectedLink> links_;
    std::unordered_set<DirectedLink, DirectedLinkHash> seen_;
    std::unordered_map<EntityId, std::size_t, EntityIdHash> degree_;
    std::unordered_map<EntityId, std::vector<Edge>, EntityIdHash> out_;
    std::unordered_map<EntityId, std::vector<Edge>, EntityIdHash> in_;
};

}  // namespace hyprec
