#include "facadegram/region.hpp"

#include <algorithm>
#include <cstdio>

namespace facadegram {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

// Two independent 64-bit lanes over the word stream.
class Digest128 {
public:
    void add(std::uint64_t w) {
        a_ = rotl(a_ ^ mix64(w + 0x9e3779b97f4a7c15ULL * ++n_), 27) * 0x880355f21e6d1965ULL;
        b_ = (b_ ^ w) * 0x100000001b3ULL;
        b_ = rotl(b_, 31) + mix64(b_ ^ n_);
    }
    Signature finish() const { return {mix64(a_ ^ n_), mix64(b_ + 0x632be59bd9b4e019ULL)}; }

private:
    std::uint64_t a_ = 0x243f6a8885a308d3ULL;
    std::uint64_t b_ = 0xcbf29ce484222325ULL;
    std::uint64_t n_ = 0;
};

void sort_bottom_left(std::vector<TerminalRect>& v) {
    std::sort(v.begin(), v.end(), [](const TerminalRect& a, const TerminalRect& b) {
        return BottomLeftOrder{}(a.rect(), b.rect());
    });
}

}  // namespace

std::string Signature::hex() const {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

std::vector<TerminalRect> canonical_content(const Layout& layout, const Region& region) {
    std::vector<TerminalRect> out;
    out.reserve(region.terminal_ids.size());
    for (int id : region.terminal_ids) {
        TerminalRect t = layout.terminals[id];
        t.x -= region.rect.x;
        t.y -= region.rect.y;
        out.push_back(t);
    }
    sort_bottom_left(out);
    return out;
}

std::vector<TerminalRect> mirrored_content(const Layout& layout, const Region& region) {
    auto out = canonical_content(layout, region);
    for (auto& t : out) t.x = region.rect.w - t.x - t.w;
    sort_bottom_left(out);
    return out;
}

Signature digest(Length w, Length h, const std::vector<TerminalRect>& content) {
    Digest128 d;
    d.add(static_cast<std::uint64_t>(w));
    d.add(static_cast<std::uint64_t>(h));
    d.add(content.size());
    for (const auto& t : content) {
        d.add(static_cast<std::uint64_t>(t.x));
        d.add(static_cast<std::uint64_t>(t.y));
        d.add(static_cast<std::uint64_t>(t.w));
        d.add(static_cast<std::uint64_t>(t.h));
        d.add(static_cast<std::uint64_t>(t.label));
    }
    return d.finish();
}

Signature signature(const Layout& layout, const Region& region) {
    return digest(region.rect.w, region.rect.h, canonical_content(layout, region));
}

Signature mirrored_signature(const Layout& layout, const Region& region) {
    return digest(region.rect.w, region.rect.h, mirrored_content(layout, region));
}

bool same_content(const Layout& a, const Region& ra, const Layout& b, const Region& rb) {
    return ra.rect.w == rb.rect.w && ra.rect.h == rb.rect.h && ra.size() == rb.size() &&
           canonical_content(a, ra) == canonical_content(b, rb);
}

LayoutGrid::LayoutGrid(const Layout& layout) : layout_(&layout) {
    xs_ = {0, layout.width};
    ys_ = {0, layout.height};
    for (const auto& t : layout.terminals) {
        xs_.push_back(t.x);
        xs_.push_back(t.x + t.w);
        ys_.push_back(t.y);
        ys_.push_back(t.y + t.h);
    }
    std::sort(xs_.begin(), xs_.end());
    xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
    std::sort(ys_.begin(), ys_.end());
    ys_.erase(std::unique(ys_.begin(), ys_.end()), ys_.end());
    nx_ = xs_.size() - 1;
    ny_ = ys_.size() - 1;
    owner_.assign(nx_ * ny_, -1);
    for (int id = 0; id < static_cast<int>(layout.terminals.size()); ++id) {
        const auto& t = layout.terminals[id];
        const std::size_t i0 = *x_index(t.x), i1 = *x_index(t.x + t.w);
        const std::size_t j0 = *y_index(t.y), j1 = *y_index(t.y + t.h);
        for (std::size_t j = j0; j < j1; ++j)
            for (std::size_t i = i0; i < i1; ++i) owner_[j * nx_ + i] = id;
    }
}

std::optional<std::size_t> LayoutGrid::x_index(Length x) const {
    auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.end() || *it != x) return std::nullopt;
    return static_cast<std::size_t>(it - xs_.begin());
}

std::optional<std::size_t> LayoutGrid::y_index(Length y) const {
    auto it = std::lower_bound(ys_.begin(), ys_.end(), y);
    if (it == ys_.end() || *it != y) return std::nullopt;
    return static_cast<std::size_t>(it - ys_.begin());
}

bool LayoutGrid::is_tiled(const Rect& r) const {
    if (r.w <= 0 || r.h <= 0) return false;
    const auto i0 = x_index(r.x), i1 = x_index(r.right());
    const auto j0 = y_index(r.y), j1 = y_index(r.top());
    if (!i0 || !i1 || !j0 || !j1) return false;
    auto inside = [&](std::size_t i, std::size_t j) {
        const int id = owner(i, j);
        return id >= 0 && r.contains(layout_->terminals[id].rect());
    };
    for (std::size_t j = *j0; j < *j1; ++j)
        if (!inside(*i0, j) || !inside(*i1 - 1, j)) return false;
    for (std::size_t i = *i0; i < *i1; ++i)
        if (!inside(i, *j0) || !inside(i, *j1 - 1)) return false;
    return true;
}

std::vector<int> LayoutGrid::terminals_in(const Rect& r) const {
    std::vector<int> ids;
    const auto i0 = x_index(r.x), i1 = x_index(r.right());
    const auto j0 = y_index(r.y), j1 = y_index(r.top());
    if (!i0 || !i1 || !j0 || !j1) return ids;
    for (std::size_t j = *j0; j < *j1; ++j) {
        for (std::size_t i = *i0; i < *i1; ++i) {
            const int id = owner(i, j);
            // Record each terminal once, at its lower-left cell.
            const auto& t = layout_->terminals[id];
            if (t.x == xs_[i] && t.y == ys_[j]) ids.push_back(id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

const RegionInfo& RegionCache::get(const Rect& r) {
    auto it = cache_.find(r);
    if (it != cache_.end()) return it->second;
    Region region = grid_->region(r);
    Signature sig = signature(grid_->layout(), region);
    return cache_.emplace(r, RegionInfo{std::move(region), sig}).first->second;
}

}  // namespace facadegram
