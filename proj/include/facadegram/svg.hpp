#pragma once

#include <string>

#include "facadegram/grammar.hpp"

namespace facadegram {

// Fill color for a material index (fixed palette, cycling).
const char* material_color(Label label);

// One rect per terminal; (0, 0) is drawn at the bottom-left.
std::string layout_to_svg(const Layout& layout, double scale = 0.05);

// The derived layout plus one outline per rule application, colored by rule,
// with the symbol name in the corner.
std::string split_tree_to_svg(const Derivation& derivation, const Grammar& grammar, double scale = 0.05);

}  // namespace facadegram
