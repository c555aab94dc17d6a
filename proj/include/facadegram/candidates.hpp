#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "facadegram/grammar.hpp"
#include "facadegram/symmetry.hpp"

namespace facadegram {

// A full-width (or full-height) line through a region, region-relative.
struct SplitLine {
    Axis axis = Axis::x;
    Length coordinate = 0;
    friend bool operator==(const SplitLine&, const SplitLine&) = default;
};

// A rule shape proposed for a region. Symbols are assigned by the caller.
struct CandidateRule {
    OpKind op = OpKind::split;
    Axis axis = Axis::x;
    std::vector<Length> cuts;      // child boundaries along `axis`, 0 and extent included
    std::vector<Length> row_cuts;  // gridsplit only: boundaries along y
    std::size_t listed = 0;        // |alpha|
    std::vector<Rect> children;    // region-relative, in expansion order
    std::vector<int> slots;        // written successor each child comes from
    std::vector<SplitLine> lines;  // interior lines the rule introduces
    std::vector<double> line_costs;
    double rule_cost = 0.0;
    double cut_cost = 0.0;         // sum of line_costs
    double heuristic = 0.0;
};

struct HeuristicConfig {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    std::size_t max_candidates = 64;
};

// Interior coordinates (region-relative) where a line crosses no terminal.
std::vector<SplitLine> valid_split_lines(const Layout& layout, const Region& region, Axis axis);
std::vector<SplitLine> valid_split_lines(const Layout& layout, const Region& region);

// Repeated-region instances fully inside `region`.
struct InstanceRef {
    Rect rect;
    std::size_t terminals = 0;
};
std::vector<InstanceRef> instances_inside(const Region& region, const SymmetryIndex& index);

// Sum over instances inside the region strictly cut by `line` of
// (terminals in the instance) / (terminals in the region).
double cut_cost(const SplitLine& line, const Region& region, const SymmetryIndex& index);
double cut_cost(const SplitLine& line, const Region& region, std::span<const InstanceRef> inside);

// lambda1 * rule cost + lambda2 * total cut cost.
double heuristic(const CandidateRule& rule, const CostModel& cost, const HeuristicConfig& config);

// Candidate rules for a region with two or more terminals, sorted by
// ascending heuristic and capped at config.max_candidates. Empty when no line
// crosses the region cleanly, i.e. no split grammar can explain it.
std::vector<CandidateRule> enumerate_candidates(RegionCache& regions, const Region& region,
                                                const SymmetryIndex& index, const CostModel& cost,
                                                const HeuristicConfig& config, OpSet enabled = OpSet::all());
std::vector<CandidateRule> enumerate_candidates(const LayoutGrid& grid, const Region& region,
                                                const SymmetryIndex& index, const CostModel& cost,
                                                const HeuristicConfig& config, OpSet enabled = OpSet::all());

// Ordering used for truncation and greedy choice.
bool candidate_less(const CandidateRule& a, const CandidateRule& b);

// P_i = exp(-H_i) / sum_j exp(-H_j), evaluated with the minimum shifted to zero.
std::vector<double> selection_probabilities(std::span<const double> heuristics);

// Uniform double in [0, 1) from 53 random bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_candidate(std::span<const CandidateRule> candidates, std::mt19937_64& rng);

// Materializes a candidate as a rule; `child_symbols` is parallel to candidate.children.
Rule to_rule(const CandidateRule& candidate, std::string lhs, const std::vector<std::string>& child_symbols);

}  // namespace facadegram
