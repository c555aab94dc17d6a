#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace facadegram {

// Fixed-point length. 1000 units = 1 meter by convention.
using Length = std::int64_t;

inline constexpr Length kUnitsPerMeter = 1000;

enum class Axis : std::uint8_t { x, y };

inline constexpr Axis other(Axis a) { return a == Axis::x ? Axis::y : Axis::x; }
inline constexpr char axis_name(Axis a) { return a == Axis::x ? 'x' : 'y'; }

struct Rect {
    Length x = 0;
    Length y = 0;
    Length w = 0;
    Length h = 0;

    constexpr Length right() const { return x + w; }
    constexpr Length top() const { return y + h; }
    constexpr Length area() const { return w * h; }

    constexpr Length lo(Axis a) const { return a == Axis::x ? x : y; }
    constexpr Length extent(Axis a) const { return a == Axis::x ? w : h; }
    constexpr Length hi(Axis a) const { return lo(a) + extent(a); }

    constexpr bool contains(const Rect& o) const {
        return o.x >= x && o.y >= y && o.right() <= right() && o.top() <= top();
    }
    // Open interiors intersect.
    constexpr bool overlaps(const Rect& o) const {
        return o.x < right() && x < o.right() && o.y < top() && y < o.top();
    }
    constexpr Rect translated(Length dx, Length dy) const { return {x + dx, y + dy, w, h}; }

    friend constexpr bool operator==(const Rect&, const Rect&) = default;
    friend constexpr auto operator<=>(const Rect&, const Rect&) = default;
};

// Sub-rectangle [from, to) of `r` along `a`, full extent on the other axis.
constexpr Rect slab(const Rect& r, Axis a, Length from, Length to) {
    return a == Axis::x ? Rect{r.x + from, r.y, to - from, r.h}
                        : Rect{r.x, r.y + from, r.w, to - from};
}

// Bottom-to-top, then left-to-right.
struct BottomLeftOrder {
    constexpr bool operator()(const Rect& a, const Rect& b) const {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        if (a.h != b.h) return a.h < b.h;
        return a.w < b.w;
    }
};

inline std::ostream& operator<<(std::ostream& os, const Rect& r) {
    return os << '(' << r.x << ',' << r.y << ',' << r.w << ',' << r.h << ')';
}

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct RectHash {
    std::size_t operator()(const Rect& r) const {
        std::size_t h = std::hash<Length>{}(r.x);
        h = hash_combine(h, std::hash<Length>{}(r.y));
        h = hash_combine(h, std::hash<Length>{}(r.w));
        return hash_combine(h, std::hash<Length>{}(r.h));
    }
};

}  // namespace facadegram
