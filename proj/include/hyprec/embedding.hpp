#pragma once
// Fixed-rank embedding storage keyed by entity, with canonical TSV
// persistence. Floats are serialized in the shortest form that parses back
// bitwise-equal (std::to_chars round-trip).

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"

namespace hyprec {

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t rank) : rank_(rank) {}

    std::size_t rank() const { return rank_; }
    std::size_t size() const { return entities_.size(); }
    bool empty() const { return entities_.empty(); }
    bool contains(const EntityId& id) const { return index_.contains(id); }

    void insert(const EntityId& id, std::span<const double> coords) {
        if (coords.size() != rank_) {
            throw structural_error("embedding rank mismatch for " + to_string(id) + ": expected " +
                                   std::to_string(rank_) + ", got " + std::to_string(coords.size()));
        }
        const auto [it, inserted] = index_.try_emplace(id, entities_.size());
        if (inserted) {
            entities_.push_back(id);
            coords_.insert(coords_.end(), coords.begin(), coords.end());
        } else {
            std::copy(coords.begin(), coords.end(), coords_.begin() + it->second * rank_);
        }
    }

    std::span<const double> point(const EntityId& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) {
            throw lookup_error("no embedding for entity " + to_string(id));
        }
        return {coords_.data() + it->second * rank_, rank_};
    }

    std::span<double> mutable_point(const EntityId& id) {
        const auto it = index_.find(id);
        if (it == index_.end()) {
            throw lookup_error("no embedding for entity " + to_string(id));
        }
        return {coords_.data() + it->second * rank_, rank_};
    }

    const std::vector<EntityId>& entities() const { return entities_; }

    // kind:key <TAB> f1,f2,...,f_rank — sorted by (kind, key).
    void save_tsv(std::ostream& os) const {
        std::vector<EntityId> sorted = entities_;
        std::sort(sorted.begin(), sorted.end());
        char buf[64];
        for (const auto& id : sorted) {
            os << to_string(id) << '\t';
            const auto p = point(id);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const auto res = std::to_chars(buf, buf + sizeof(buf), p[i]);
                if (i > 0) {
                    os << ',';
                }
                os.write(buf, res.ptr - buf);
            }
            os << '\n';
        }
    }

    static EmbeddingTable load_tsv(std::istream& is) {
        EmbeddingTable table;
        std::string line;
        std::size_t line_no = 0;
        std::vector<double> coords;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) {
                continue;
            }
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw validation_error("embedding tsv line " + std::to_string(line_no) +
                                       ": expected 2 tab-separated fields");
            }
            const EntityId id = parse_entity(std::string_view(line).substr(0, tab));
            coords.clear();
            const char* p = line.data() + tab + 1;
            const char* end = line.data() + line.size();
            while (p < end) {
                double value{};
                const auto res = std::from_chars(p, end, value);
                if (res.ec != std::errc{}) {
                    throw validation_error("embedding tsv line " + std::to_string(line_no) +
                                           ": bad float");
                }
                coords.push_back(value);
                p = res.ptr;
                if (p < end && *p == ',') {
                    ++p;
                }
            }
            if (table.entities_.empty()) {
                table.rank_ = coords.size();
            } else if (coords.size() != table.rank_) {
                throw validation_error("embedding tsv line " + std::to_string(line_no) +
                                       ": rank mismatch");
            }
            table.insert(id, coords);
        }
        return table;
    }

private:
    std::size_t rank_ = 0;
    std::vector<EntityId> entities_;
    std::vector<double> coords_;
    std::unordered_map<EntityId, std::size_t, EntityIdHash> index_;
};

}  // namespace hyprec
