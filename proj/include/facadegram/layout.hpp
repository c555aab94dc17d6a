#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "facadegram/geometry.hpp"

namespace facadegram {

using Label = int;

// Label 0 is reserved for "transparent/outside" and never labels a terminal.
inline constexpr Label kTransparent = 0;

struct TerminalRect {
    Length x = 0;
    Length y = 0;
    Length w = 0;
    Length h = 0;
    Label label = 1;

    Rect rect() const { return {x, y, w, h}; }
    friend bool operator==(const TerminalRect&, const TerminalRect&) = default;
};

struct Layout {
    Length width = 0;
    Length height = 0;
    std::vector<std::string> materials;
    std::vector<TerminalRect> terminals;

    Rect domain() const { return {0, 0, width, height}; }
    friend bool operator==(const Layout&, const Layout&) = default;
};

enum class ViolationKind { overlap, gap, out_of_bounds, bad_label };

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::vector<int> terminals;  // offending terminal ids (empty for gaps)
    Rect where{};                // gap bounding box, or the offending terminal's rect
    std::string message;
};

std::vector<Violation> validate_layout(const Layout& layout);

// Throws ValidationError listing every violation when the layout is invalid.
void require_valid(const Layout& layout);

// Terminals sorted bottom-to-top, left-to-right. Derivations produce this order.
Layout canonicalize(Layout layout);

// Same domain, materials and terminal multiset, regardless of terminal order.
bool same_layout(const Layout& a, const Layout& b);

std::string layout_to_string(const Layout& layout);
Layout layout_from_string(const std::string& text);

Layout load_layout(const std::filesystem::path& path);
void save_layout(const Layout& layout, const std::filesystem::path& path);

// Optional "groups" key of a layout file: arrays of terminal ids that must share a size.
std::vector<std::vector<int>> load_size_groups(const std::filesystem::path& path);

}  // namespace facadegram
