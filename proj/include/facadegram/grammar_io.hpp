#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "facadegram/grammar.hpp"

namespace facadegram {

// Text form, one rule per line:
//
//   version 1
//   materials transparent Wall Window
//   size 4000 3000
//   start Facade
//   Facade -> split(y){ 1000: Wall | 2000: Floor }
//   Floor -> repeat(x){ 1000: Window | ~1.5: Wall }
//   Tile -> (0.5) gridsplit{ 100 | 200 ; 50 | 60 ; A | B ; C | D }
//
// Plain numbers are absolute sizes in length units, `~w` is a relative weight
// and a parenthesized number after the arrow is the rule's selection weight.
// Gridsplit bodies list column sizes, row sizes, then rows of cells bottom-up.
std::string grammar_to_text(const Grammar& grammar);
Grammar grammar_from_text(std::string_view text);

// Structured form with `version`, `materials`, `start`, `rules` keys.
std::string grammar_to_json(const Grammar& grammar);
Grammar grammar_from_json(std::string_view text);

// Format picked by extension: `.json` is structured, anything else is text.
Grammar load_grammar(const std::filesystem::path& path);
void save_grammar(const Grammar& grammar, const std::filesystem::path& path);

std::string format_number(double v);

}  // namespace facadegram
