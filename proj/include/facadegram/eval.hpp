#pragma once

#include <set>
#include <string>
#include <vector>

#include "facadegram/grammar.hpp"
#include "facadegram/optimizer.hpp"

namespace facadegram {

// Rects of every compound node of the derivation of `layout`, root excluded.
// Throws DerivationError when the grammar does not reproduce the layout.
std::set<Rect> nonterminal_regions(const Grammar& grammar, const Layout& layout);

struct ComparisonResult {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::size_t common_regions = 0;
    std::size_t regions_a = 0;
    std::size_t regions_b = 0;
};

// Scores from region counts. An empty side has precision (or recall) 1 when
// the other side is empty too, and 0 otherwise.
ComparisonResult score_regions(std::size_t common, std::size_t regions_a, std::size_t regions_b);

// `a` is the candidate grammar, `b` the reference.
ComparisonResult compare(const Grammar& a, const Grammar& b, const Layout& layout);

struct BenchmarkInput {
    std::string id;
    Layout layout;
};

struct BenchmarkRow {
    std::string layout_id;
    Method method = Method::adp;
    int runs = 0;
    double cost_min = 0.0, cost_mean = 0.0;
    double rules_min = 0.0, rules_mean = 0.0;
    double time_ms_min = 0.0, time_ms_mean = 0.0;
    bool failed = false;
    std::string error;
};

struct BenchmarkOptions {
    int runs = 10;  // seeds config.seed .. config.seed + runs - 1
    int jobs = 1;   // cells evaluated in parallel
};

std::vector<BenchmarkRow> benchmark(std::span<const BenchmarkInput> layouts, std::span<const Method> methods,
                                    const SearchConfig& config, const BenchmarkOptions& options = {});

// Columns: layout_id, method, runs, cost_min, cost_mean, rules_min, rules_mean,
// time_ms_min, time_ms_mean. Failed cells carry "failed" in the numeric columns.
std::string benchmark_to_csv(std::span<const BenchmarkRow> rows);

}  // namespace facadegram
