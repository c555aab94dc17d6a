#pragma once

#include <string>
#include <vector>

#include "facadegram/layout.hpp"

namespace facadegram {

using SizeGroups = std::vector<std::vector<int>>;

// Every label shared by two or more terminals forms one group.
SizeGroups default_size_groups(const Layout& layout);

// Continuous solution of the equality-constrained least-squares fit.
//
// Unknowns are the positions of the layout's edge lines. Edges that coincide
// along a shared boundary (neighbors across the edge, or stacked terminals with
// a common side) form a single line, and the domain border lines are fixed, so
// any solution that keeps the line order is still a tiling. Grouped terminals
// are constrained to equal widths and equal heights. The objective is the sum
// of squared deviations of every terminal's (x, y, w, h) from the input.
struct FitSolution {
    std::vector<double> x, y, w, h;  // per terminal
    double objective = 0.0;
    std::size_t variables = 0;        // edge lines, fixed ones included
    std::size_t free_variables = 0;   // dimension of the feasible set
};

FitSolution solve_fit(const Layout& layout, const SizeGroups& groups);

// Integer layout closest to the fit: free line positions are rounded to whole
// units and dependent lines recomputed, so satisfied constraints stay exact.
// Throws InfeasibleError naming the conflicting constraints, or when the fit
// collapses a terminal.
Layout regularize(const Layout& layout, const SizeGroups& groups);
inline Layout regularize(const Layout& layout) { return regularize(layout, default_size_groups(layout)); }

// Sum of squared coordinate deviations between two layouts with matching terminal order.
double fit_objective(const Layout& input, const Layout& output);

}  // namespace facadegram
