#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "facadegram/layout.hpp"

namespace facadegram {

// A tiled rectangle of a layout together with the terminals inside it.
struct Region {
    Rect rect;
    std::vector<int> terminal_ids;  // sorted

    std::size_t size() const { return terminal_ids.size(); }
    friend bool operator==(const Region&, const Region&) = default;
};

// 128-bit translation-invariant content digest. Equal digests must still be
// confirmed with `same_content` before two regions are treated as congruent.
struct Signature {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    std::string hex() const;
    friend bool operator==(const Signature&, const Signature&) = default;
    friend auto operator<=>(const Signature&, const Signature&) = default;
};

struct SignatureHash {
    std::size_t operator()(const Signature& s) const { return static_cast<std::size_t>(s.hi ^ (s.lo * 0x9e3779b97f4a7c15ULL)); }
};

// Region contents translated to the origin, sorted bottom-to-top, left-to-right.
std::vector<TerminalRect> canonical_content(const Layout& layout, const Region& region);

// Same as canonical_content after reflecting the region about its vertical center line.
std::vector<TerminalRect> mirrored_content(const Layout& layout, const Region& region);

Signature digest(Length w, Length h, const std::vector<TerminalRect>& content);

Signature signature(const Layout& layout, const Region& region);
Signature mirrored_signature(const Layout& layout, const Region& region);

bool same_content(const Layout& a, const Region& ra, const Layout& b, const Region& rb);

// Coordinate-compressed cell grid of a valid layout for fast tiling queries.
class LayoutGrid {
public:
    explicit LayoutGrid(const Layout& layout);

    const Layout& layout() const { return *layout_; }
    const std::vector<Length>& xs() const { return xs_; }
    const std::vector<Length>& ys() const { return ys_; }

    // True iff `r` lies inside the domain and no terminal crosses its border.
    bool is_tiled(const Rect& r) const;

    // Sorted ids of the terminals covering `r`. Only meaningful when is_tiled(r).
    std::vector<int> terminals_in(const Rect& r) const;

    Region region(const Rect& r) const { return {r, terminals_in(r)}; }
    Region whole() const { return region(layout_->domain()); }

    int owner(std::size_t i, std::size_t j) const { return owner_[j * nx_ + i]; }

private:
    std::optional<std::size_t> x_index(Length x) const;
    std::optional<std::size_t> y_index(Length y) const;

    const Layout* layout_;
    std::vector<Length> xs_, ys_;
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<int> owner_;
};

struct RegionInfo {
    Region region;
    Signature sig;
};

// Memoizes region lookups and signatures by rectangle. Not thread-safe.
class RegionCache {
public:
    explicit RegionCache(const LayoutGrid& grid) : grid_(&grid) {}

    const RegionInfo& get(const Rect& r);
    const LayoutGrid& grid() const { return *grid_; }
    std::size_t size() const { return cache_.size(); }

private:
    const LayoutGrid* grid_;
    std::unordered_map<Rect, RegionInfo, RectHash> cache_;
};

}  // namespace facadegram
