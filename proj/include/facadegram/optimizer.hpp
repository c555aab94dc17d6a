#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "facadegram/candidates.hpp"
#include "facadegram/grammar.hpp"
#include "facadegram/symmetry.hpp"

namespace facadegram {

enum class Method { adp, greedy, importance_sampling };

const char* to_string(Method m);
std::optional<Method> parse_method(std::string_view name);  // "adp", "greedy", "is"

struct SearchConfig {
    int iterations = 2000;
    std::uint64_t seed = 0;
    double epsilon0 = 0.9;
    double tau = 0.0;  // <= 0 means iterations / 5
    CostModel cost;
    HeuristicConfig heuristic;
    OpSet ops = OpSet::all();
    bool protect_regions = false;
    int threads = 1;

    double effective_tau() const { return tau > 0.0 ? tau : static_cast<double>(iterations) / 5.0; }
    // Exploration probability at iteration t (0-based).
    double epsilon(int t) const;
    // Throws ValidationError on out-of-range values.
    void validate() const;
};

// Best-known subtree cost of a region content and the rule that achieved it.
struct ValueEntry {
    double value = 0.0;
    CandidateRule action;  // region-relative geometry; symbols are per-iteration
};

class ValueTable {
public:
    const ValueEntry* find(const Signature& sig) const;
    // Stores the entry if it is new or strictly cheaper. Returns true if stored.
    bool offer(const Signature& sig, double value, const CandidateRule& action);
    // Min-value merge, visiting `other` in signature order.
    void merge(const ValueTable& other);

    std::size_t size() const { return entries_.size(); }
    const std::unordered_map<Signature, ValueEntry, SignatureHash>& entries() const { return entries_; }

private:
    std::unordered_map<Signature, ValueEntry, SignatureHash> entries_;
};

// Subtree values for every non-leaf node of `tree` (a derivation of `layout`
// by `grammar`): rule cost plus, for each distinct child content, that child's
// value. Offers each value to the table. Returns the root value.
double update_value_table(ValueTable& table, const SplitTree& tree, const Grammar& grammar, const LayoutGrid& grid,
                          const CostModel& cost);

struct IterationRecord {
    int iteration = 0;
    double best_cost = 0.0;   // infinity until the first complete iteration
    double elapsed_ms = 0.0;  // since the start of the run
    double iteration_ms = 0.0;
    bool aborted = false;
};

struct SearchReport {
    Method method = Method::adp;
    Grammar grammar;
    double best_cost = 0.0;
    std::size_t rule_count = 0;
    int best_iteration = -1;
    int iterations = 0;
    int aborted = 0;
    double elapsed_ms = 0.0;
    std::vector<IterationRecord> history;
    std::size_t value_table_size = 0;
};

std::string report_to_json(const SearchReport& report);
// Columns: iteration, best_cost, elapsed_ms.
std::string history_to_csv(const SearchReport& report);

// Samples instances with probability proportional to importance + 1 and keeps
// those not overlapping an instance kept earlier.
std::vector<Region> select_protected_regions(const SymmetryIndex& index, std::mt19937_64& rng);

SearchReport infer(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config);
SearchReport infer(const Layout& layout, const SearchConfig& config);
SearchReport infer_greedy(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config);
SearchReport infer_greedy(const Layout& layout, const SearchConfig& config);
SearchReport infer_importance_sampling(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config);
SearchReport infer_importance_sampling(const Layout& layout, const SearchConfig& config);
SearchReport infer_with(Method method, const Layout& layout, const SearchConfig& config);

// One grammar for all layouts; grammar.starts[i] derives layouts[i].
SearchReport infer_joint(std::span<const Layout> layouts, const SearchConfig& config, Method method = Method::adp);

}  // namespace facadegram
