#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facadegram/layout.hpp"

namespace facadegram {

enum class OpKind : std::uint8_t { split, repeat, repeat_aba, symsplit, gridsplit };

inline constexpr std::array<OpKind, 5> kAllOps{OpKind::split, OpKind::repeat, OpKind::repeat_aba,
                                               OpKind::symsplit, OpKind::gridsplit};

const char* to_string(OpKind op);
std::optional<OpKind> parse_op(std::string_view name);

// Bit set over OpKind.
class OpSet {
public:
    constexpr OpSet() = default;
    constexpr OpSet(std::initializer_list<OpKind> ops) {
        for (auto op : ops) insert(op);
    }
    static constexpr OpSet all() { return {OpKind::split, OpKind::repeat, OpKind::repeat_aba, OpKind::symsplit, OpKind::gridsplit}; }

    constexpr void insert(OpKind op) { bits_ |= bit(op); }
    constexpr void erase(OpKind op) { bits_ &= static_cast<std::uint8_t>(~bit(op)); }
    constexpr bool contains(OpKind op) const { return (bits_ & bit(op)) != 0; }
    friend constexpr bool operator==(OpSet, OpSet) = default;

private:
    static constexpr std::uint8_t bit(OpKind op) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(op)); }
    std::uint8_t bits_ = 0;
};

// Parses a comma separated operator list, e.g. "split,repeat,symsplit".
OpSet parse_op_set(std::string_view list);

enum class SizeKind : std::uint8_t { absolute, relative };

// Absolute sizes are whole length units. Relative sizes are weights in meters
// that share whatever the absolute sizes leave free.
struct SizeSpec {
    SizeKind kind = SizeKind::absolute;
    double value = 0.0;

    static SizeSpec absolute(Length units) { return {SizeKind::absolute, static_cast<double>(units)}; }
    static SizeSpec relative(double weight) { return {SizeKind::relative, weight}; }

    bool is_relative() const { return kind == SizeKind::relative; }
    // Extent in length units this size stands for at its source dimensions.
    double nominal() const { return is_relative() ? value * kUnitsPerMeter : value; }

    friend bool operator==(const SizeSpec&, const SizeSpec&) = default;
};

struct Successor {
    SizeSpec size;
    std::string symbol;
    friend bool operator==(const Successor&, const Successor&) = default;
};

struct Rule {
    std::string lhs;
    OpKind op = OpKind::split;
    Axis axis = Axis::x;
    std::vector<Successor> successors;  // empty for gridsplit

    // gridsplit only: column widths, row heights (bottom to top), row-major symbols.
    std::vector<SizeSpec> columns;
    std::vector<SizeSpec> rows;
    std::vector<std::string> cells;

    double weight = 1.0;  // selection weight among rules sharing a lhs

    // |alpha|: the number of symbols written in the rule.
    std::size_t listed() const { return op == OpKind::gridsplit ? cells.size() : successors.size(); }

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct Grammar {
    std::vector<std::string> materials;  // index 0 is the reserved transparent entry
    std::vector<std::string> starts;     // starts.front() is the start symbol
    std::vector<Rule> rules;
    // Dimensions of the layout the grammar was extracted from, when known.
    std::optional<std::pair<Length, Length>> source_size;

    const std::string& start() const { return starts.front(); }
    std::optional<Label> terminal_label(std::string_view symbol) const;
    bool is_terminal(std::string_view symbol) const { return terminal_label(symbol).has_value(); }
    std::vector<std::size_t> rules_for(std::string_view lhs) const;
    bool deterministic() const;

    friend bool operator==(const Grammar&, const Grammar&) = default;
};

struct CostModel {
    std::array<double, 5> op_cost{0.1, 0.5, 0.5, 0.5, 0.1};  // indexed by OpKind
    double per_symbol_cost = 1.0;
    bool use_op_cost = true;
    bool use_symbol_cost = true;

    double& cost_of(OpKind op) { return op_cost[static_cast<std::size_t>(op)]; }
    double cost_of(OpKind op) const { return op_cost[static_cast<std::size_t>(op)]; }

    double rule_cost(OpKind op, std::size_t listed) const {
        double c = 0.0;
        if (use_op_cost) c += cost_of(op);
        if (use_symbol_cost) c += per_symbol_cost * static_cast<double>(listed);
        return c;
    }
    double rule_cost(const Rule& rule) const { return rule_cost(rule.op, rule.listed()); }
};

// Sum of rule costs, every rule counted once.
double grammar_cost(const Grammar& grammar, const CostModel& cost = {});

// Throws ValidationError if a symbol lacks a rule, a size is not positive, a
// rule is malformed, or a deterministic grammar is cyclic.
void check_grammar(const Grammar& grammar);

struct Piece {
    Rect rect;           // relative to the expanded region's lower-left corner
    std::string symbol;
    int slot = 0;        // index of the written successor (or grid cell) it comes from
};

// Sub-regions in listed order along the axis. Absolute sizes are kept
// exactly; relative sizes share the remaining extent in proportion; repeat
// counts are the nearest whole number of nominal patterns (at least one).
// Throws DerivationError when the sizes cannot fill the extent.
std::vector<Piece> expand_rule(const Rule& rule, Length width, Length height);

struct SplitNode {
    Rect rect;
    std::string symbol;
    int rule = -1;    // index into Grammar::rules, -1 for terminal leaves
    int slot = -1;    // successor slot in the parent's rule
    int parent = -1;
    std::vector<int> children;

    bool is_leaf() const { return rule < 0; }
};

struct SplitTree {
    std::vector<SplitNode> nodes;  // nodes[0] is the root
};

struct Derivation {
    Layout layout;
    SplitTree tree;
};

inline constexpr int kMaxDerivationDepth = 64;

// Applies the grammar to a width x height domain. Rules sharing a lhs are
// sampled by weight per occurrence; deterministic grammars ignore the seed.
// `start` overrides the start symbol (used by joint grammars).
Derivation derive(const Grammar& grammar, Length width, Length height, std::uint64_t seed = 0,
                  std::string_view start = {});

}  // namespace facadegram
