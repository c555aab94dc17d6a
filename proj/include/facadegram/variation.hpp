#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facadegram/grammar.hpp"
#include "facadegram/regularize.hpp"

namespace facadegram {

inline constexpr Length kDefaultThinThreshold = 200;

// Rewrites every absolute size as a relative weight in meters, except slabs of
// at most `thin_threshold` units, which keep their exact size. A rule made only
// of thin slabs becomes fully relative so it can still stretch.
Grammar make_size_independent(const Grammar& grammar, Length thin_threshold = kDefaultThinThreshold);

// Derives at new dimensions: repeats place round(available / pattern) copies
// (at least one), relative sizes share the space left after absolute ones.
Derivation derive_resized(const Grammar& grammar, Length width, Length height, std::uint64_t seed = 0);

// Least-squares cleanup of a derived layout: terminals reached through the
// same chain of rule slots from the root are constrained to equal sizes, and
// edges shared in the derivation stay shared.
struct AlignmentProblem {
    Layout layout;
    SizeGroups groups;
};

AlignmentProblem alignment_problem(const Derivation& derivation);
Layout align_layout(const AlignmentProblem& problem);

struct MergeStats {
    std::size_t symbols = 0;             // non-terminals after merging
    std::size_t unified = 0;             // symbols shared by two or more inputs
    std::size_t stochastic_symbols = 0;  // symbols left with more than one rule
};

struct MergeResult {
    Grammar grammar;
    MergeStats stats;
};

// Unifies non-terminals whose derived regions (at each grammar's source size)
// have equal content. Distinct rules for one symbol become weighted choices.
// Inputs whose start contents differ are joined under a new start symbol.
MergeResult merge_grammars(std::span<const Grammar> grammars, std::span<const double> weights);

}  // namespace facadegram
