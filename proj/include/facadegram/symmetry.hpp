#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "facadegram/region.hpp"

namespace facadegram {

enum class Direction { left, right, bottom, top };

inline constexpr Direction kDirections[] = {Direction::left, Direction::right, Direction::bottom, Direction::top};

// All translationally congruent occurrences of one region content.
struct RepeatedRegionSet {
    Signature sig;
    std::vector<Region> instances;  // sorted bottom-to-top, then left-to-right

    std::size_t terminal_count() const { return instances.empty() ? 0 : instances.front().size(); }
    std::size_t occurrence_count() const { return instances.size(); }
};

// (a - 1) * (o - 1) for a terminals per instance and o occurrences.
double importance_score(const RepeatedRegionSet& set);

class SymmetryIndex {
public:
    SymmetryIndex() = default;

    const RepeatedRegionSet* find(const Signature& sig) const;
    // Inserts or replaces the set stored under set.sig.
    void insert(RepeatedRegionSet set);
    bool erase(const Signature& sig);

    std::size_t size() const { return sets_.size(); }
    bool empty() const { return sets_.empty(); }

    // Sets ordered by their first instance (bottom-to-top, left-to-right), then size.
    std::vector<const RepeatedRegionSet*> sorted_sets() const;

    // One line per set: signature prefix, a, o, instance rects.
    std::string dump() const;

private:
    std::unordered_map<Signature, RepeatedRegionSet, SignatureHash> sets_;
};

// Smallest tiled rectangle extending `region` in `dir` (other extent unchanged),
// or nullopt when none exists before the layout border.
std::optional<Region> grow_region(const LayoutGrid& grid, const Region& region, Direction dir);

// Every tiled region of the layout congruent to `region`, sorted bottom-left first.
std::vector<Region> find_occurrences(const LayoutGrid& grid, const Region& region);

// Seeds with every terminal occurring at least twice, then grows each known
// instance in all four directions until no new repeated content appears.
SymmetryIndex build_symmetry_index(const LayoutGrid& grid);

}  // namespace facadegram
