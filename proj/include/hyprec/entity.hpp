#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "hyprec/errors.hpp"

namespace hyprec {

enum class EntityKind : std::uint8_t { Format, LiveStation, Artist, Genre, Track };

inline constexpr std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Format: return "format";
        case EntityKind::LiveStation: return "live_station";
        case EntityKind::Artist: return "artist";
        case EntityKind::Genre: return "genre";
        case EntityKind::Track: return "track";
    }
    return "?";
}

inline std::optional<EntityKind> parse_entity_kind(std::string_view s) {
    if (s == "format") return EntityKind::Format;
    if (s == "live_station") return EntityKind::LiveStation;
    if (s == "artist") return EntityKind::Artist;
    if (s == "genre") return EntityKind::Genre;
    if (s == "track") return EntityKind::Track;
    return std::nullopt;
}

// Typed node identifier. Keys are namespaced by kind, so a track and an artist
// sharing a raw catalog id never collide. Compared by value, ordered (kind, key).
struct EntityId {
    EntityKind kind{EntityKind::Format};
    std::string key;

    bool operator==(const EntityId&) const = default;
    auto operator<=>(const EntityId&) const = default;
};

inline EntityId make_entity(EntityKind kind, std::string key) {
    if (key.empty()) {
        throw validation_error("entity key must be nonempty");
    }
    if (key.find_first_of("\t\n") != std::string::npos) {
        throw validation_error("entity key must not contain tabs or newlines: \"" + key + "\"");
    }
    return EntityId{kind, std::move(key)};
}

inline std::string to_string(const EntityId& id) {
    std::string out{to_string(id.kind)};
    out += ':';
    out += id.key;
    return out;
}

// Parses "kind:key"; the key keeps any further colons.
inline EntityId parse_entity(std::string_view text) {
    const auto sep = text.find(':');
    if (sep == std::string_view::npos) {
        throw validation_error("expected \"kind:key\", got \"" + std::string(text) + "\"");
    }
    const auto kind = parse_entity_kind(text.substr(0, sep));
    if (!kind) {
        throw validation_error("unknown entity kind in \"" + std::string(text) + "\"");
    }
    return make_entity(*kind, std::string(text.substr(sep + 1)));
}

struct EntityIdHash {
    std::size_t operator()(const EntityId& id) const noexcept {
        const std::size_t h = std::hash<std::string>{}(id.key);
        return h ^ (static_cast<std::size_t>(id.kind) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

}  // namespace hyprec
