#include "facadegram/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "facadegram/errors.hpp"

namespace facadegram {

const char* to_string(OpKind op) {
    switch (op) {
        case OpKind::split: return "split";
        case OpKind::repeat: return "repeat";
        case OpKind::repeat_aba: return "repeatABA";
        case OpKind::symsplit: return "symsplit";
        case OpKind::gridsplit: return "gridsplit";
    }
    return "?";
}

std::optional<OpKind> parse_op(std::string_view name) {
    for (auto op : kAllOps)
        if (name == to_string(op)) return op;
    return std::nullopt;
}

OpSet parse_op_set(std::string_view list) {
    OpSet set;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        std::string_view name = list.substr(pos, comma - pos);
        while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
        while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
        if (!name.empty()) {
            const auto op = parse_op(name);
            if (!op) throw ParseError("unknown operator '" + std::string(name) + "'");
            set.insert(*op);
        }
        pos = comma + 1;
    }
    return set;
}

std::optional<Label> Grammar::terminal_label(std::string_view symbol) const {
    for (std::size_t i = 1; i < materials.size(); ++i)
        if (materials[i] == symbol) return static_cast<Label>(i);
    return std::nullopt;
}

std::vector<std::size_t> Grammar::rules_for(std::string_view lhs) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (rules[i].lhs == lhs) out.push_back(i);
    return out;
}

bool Grammar::deterministic() const {
    std::unordered_set<std::string_view> seen;
    for (const auto& r : rules)
        if (!seen.insert(r.lhs).second) return false;
    return true;
}

double grammar_cost(const Grammar& grammar, const CostModel& cost) {
    double total = 0.0;
    for (const auto& rule : grammar.rules) total += cost.rule_cost(rule);
    return total;
}

namespace {

std::vector<std::string_view> rhs_symbols(const Rule& rule) {
    std::vector<std::string_view> out;
    if (rule.op == OpKind::gridsplit) {
        for (const auto& c : rule.cells) out.push_back(c);
    } else {
        for (const auto& s : rule.successors) out.push_back(s.symbol);
    }
    return out;
}

void check_size(const SizeSpec& s, const std::string& where) {
    if (!(s.value > 0.0) || !std::isfinite(s.value))
        throw ValidationError(where + ": sizes must be positive");
    if (!s.is_relative() && s.value != std::floor(s.value))
        throw ValidationError(where + ": absolute sizes must be whole length units");
}

}  // namespace

void check_grammar(const Grammar& g) {
    if (g.materials.empty()) throw ValidationError("grammar: material table is empty");
    if (g.starts.empty()) throw ValidationError("grammar: no start symbol");
    std::unordered_set<std::string_view> names;
    for (std::size_t i = 1; i < g.materials.size(); ++i)
        if (!names.insert(g.materials[i]).second)
            throw ValidationError("grammar: duplicate material '" + g.materials[i] + "'");

    std::unordered_map<std::string_view, std::vector<std::size_t>> by_lhs;
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        const auto& r = g.rules[i];
        const std::string where = "rule " + std::to_string(i + 1) + " (" + r.lhs + ")";
        if (g.is_terminal(r.lhs)) throw ValidationError(where + ": terminal symbol on the left-hand side");
        if (!(r.weight > 0.0)) throw ValidationError(where + ": weight must be positive");
        by_lhs[r.lhs].push_back(i);
        if (r.op == OpKind::gridsplit) {
            if (r.columns.empty() || r.rows.empty() || r.cells.size() != r.columns.size() * r.rows.size())
                throw ValidationError(where + ": gridsplit needs columns x rows cells");
            for (const auto& s : r.columns) check_size(s, where);
            for (const auto& s : r.rows) check_size(s, where);
        } else {
            if (r.successors.empty()) throw ValidationError(where + ": no successors");
            if (r.op == OpKind::repeat_aba && r.successors.size() != 2)
                throw ValidationError(where + ": repeatABA takes exactly two successors");
            for (const auto& s : r.successors) check_size(s.size, where);
        }
    }
    auto defined = [&](std::string_view s) { return g.is_terminal(s) || by_lhs.count(s) > 0; };
    for (const auto& s : g.starts)
        if (!defined(s)) throw ValidationError("grammar: start symbol '" + s + "' has no rule");
    for (std::size_t i = 0; i < g.rules.size(); ++i)
        for (auto s : rhs_symbols(g.rules[i]))
            if (!defined(s))
                throw ValidationError("grammar: symbol '" + std::string(s) + "' used by " + g.rules[i].lhs +
                                      " is neither a terminal nor has a rule");

    if (!g.deterministic()) return;
    // Deterministic grammars must be acyclic from every start symbol.
    std::unordered_map<std::string_view, int> state;  // 1 = on stack, 2 = done
    std::function<void(std::string_view)> visit = [&](std::string_view sym) {
        if (g.is_terminal(sym)) return;
        int& st = state[sym];
        if (st == 2) return;
        if (st == 1) throw ValidationError("grammar: cycle through symbol '" + std::string(sym) + "'");
        st = 1;
        for (auto child : rhs_symbols(g.rules[by_lhs[sym].front()])) visit(child);
        state[sym] = 2;
    };
    for (const auto& s : g.starts) visit(s);
}

namespace {

std::string describe(const Rule& rule) { return rule.lhs + " -> " + to_string(rule.op); }

// Integer sizes for `specs` that fill `extent` exactly.
std::vector<Length> distribute(const std::vector<SizeSpec>& specs, Length extent, const Rule& rule) {
    Length fixed = 0;
    double weight = 0.0;
    for (const auto& s : specs) {
        if (s.is_relative()) weight += s.value;
        else fixed += static_cast<Length>(s.value);
    }
    std::vector<Length> out(specs.size());
    if (weight == 0.0) {
        if (fixed != extent) {
            std::ostringstream msg;
            msg << describe(rule) << ": sizes sum to " << fixed << " but the region extent is " << extent;
            throw DerivationError(msg.str());
        }
        for (std::size_t i = 0; i < specs.size(); ++i) out[i] = static_cast<Length>(specs[i].value);
        return out;
    }
    const Length free = extent - fixed;
    if (free <= 0) {
        std::ostringstream msg;
        msg << describe(rule) << ": absolute sizes need " << fixed << " but the region extent is " << extent;
        throw DerivationError(msg.str());
    }
    // Cumulative rounding keeps the relative shares summing to `free`.
    double cum = 0.0;
    Length placed = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].is_relative()) {
            out[i] = static_cast<Length>(specs[i].value);
            continue;
        }
        cum += specs[i].value;
        const Length boundary = static_cast<Length>(std::llround(cum / weight * static_cast<double>(free)));
        out[i] = boundary - placed;
        placed = boundary;
        if (out[i] <= 0) {
            std::ostringstream msg;
            msg << describe(rule) << ": extent " << extent << " too small for its relative sizes";
            throw DerivationError(msg.str());
        }
    }
    return out;
}

// Listed successor slots of the full expansion sequence along the axis.
std::vector<int> expansion_slots(const Rule& rule, Length extent) {
    const auto& succ = rule.successors;
    const int k = static_cast<int>(succ.size());
    std::vector<int> slots;
    switch (rule.op) {
        case OpKind::split:
            for (int i = 0; i < k; ++i) slots.push_back(i);
            break;
        case OpKind::repeat: {
            double pattern = 0.0;
            for (const auto& s : succ) pattern += s.size.nominal();
            const long n = std::max(1L, std::lround(static_cast<double>(extent) / pattern));
            for (long c = 0; c < n; ++c)
                for (int i = 0; i < k; ++i) slots.push_back(i);
            break;
        }
        case OpKind::repeat_aba: {
            const double a = succ[0].size.nominal(), b = succ[1].size.nominal();
            const long n = std::max(1L, std::lround((static_cast<double>(extent) - a) / (a + b)));
            slots.push_back(0);
            for (long c = 0; c < n; ++c) {
                slots.push_back(1);
                slots.push_back(0);
            }
            break;
        }
        case OpKind::symsplit:
            for (int i = 0; i < k; ++i) slots.push_back(i);
            for (int i = k - 2; i >= 0; --i) slots.push_back(i);
            break;
        case OpKind::gridsplit:
            break;
    }
    return slots;
}

}  // namespace

std::vector<Piece> expand_rule(const Rule& rule, Length width, Length height) {
    std::vector<Piece> out;
    const Rect whole{0, 0, width, height};
    if (rule.op == OpKind::gridsplit) {
        const auto cols = distribute(rule.columns, width, rule);
        const auto rows = distribute(rule.rows, height, rule);
        Length y = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Length x = 0;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const std::size_t cell = r * cols.size() + c;
                out.push_back({Rect{x, y, cols[c], rows[r]}, rule.cells[cell], static_cast<int>(cell)});
                x += cols[c];
            }
            y += rows[r];
        }
        return out;
    }
    const Length extent = whole.extent(rule.axis);
    const auto slots = expansion_slots(rule, extent);
    std::vector<SizeSpec> specs;
    specs.reserve(slots.size());
    for (int s : slots) specs.push_back(rule.successors[s].size);
    const auto sizes = distribute(specs, extent, rule);
    Length pos = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        out.push_back({slab(whole, rule.axis, pos, pos + sizes[i]), rule.successors[slots[i]].symbol, slots[i]});
        pos += sizes[i];
    }
    return out;
}

namespace {

class Deriver {
public:
    Deriver(const Grammar& g, std::uint64_t seed) : g_(g), rng_(seed) {
        for (std::size_t i = 0; i < g.rules.size(); ++i) by_lhs_[g.rules[i].lhs].push_back(i);
    }

    Derivation run(Length width, Length height, std::string_view start) {
        Derivation d;
        d.layout.width = width;
        d.layout.height = height;
        d.layout.materials = g_.materials;
        out_ = &d;
        expand(std::string(start), Rect{0, 0, width, height}, -1, -1, 0);
        d.layout = canonicalize(std::move(d.layout));
        return d;
    }

private:
    std::size_t choose(const std::vector<std::size_t>& options) {
        if (options.size() == 1) return options.front();
        double total = 0.0;
        for (auto i : options) total += g_.rules[i].weight;
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53 * total;
        double acc = 0.0;
        for (auto i : options) {
            acc += g_.rules[i].weight;
            if (u < acc) return i;
        }
        return options.back();
    }

    void expand(const std::string& symbol, const Rect& rect, int parent, int slot, int depth) {
        auto& nodes = out_->tree.nodes;
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({rect, symbol, -1, slot, parent, {}});
        if (parent >= 0) nodes[parent].children.push_back(id);

        if (auto label = g_.terminal_label(symbol)) {
            out_->layout.terminals.push_back({rect.x, rect.y, rect.w, rect.h, *label});
            return;
        }
        if (depth >= kMaxDerivationDepth)
            throw DerivationError("derivation exceeds depth " + std::to_string(kMaxDerivationDepth) + " at symbol " +
                                  symbol + " (recursive grammar?)");
        auto it = by_lhs_.find(symbol);
        if (it == by_lhs_.end()) throw DerivationError("symbol '" + symbol + "' has no rule");
        const std::size_t ri = choose(it->second);
        nodes[id].rule = static_cast<int>(ri);
        for (auto& piece : expand_rule(g_.rules[ri], rect.w, rect.h))
            expand(piece.symbol, piece.rect.translated(rect.x, rect.y), id, piece.slot, depth + 1);
    }

    const Grammar& g_;
    std::mt19937_64 rng_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_lhs_;
    Derivation* out_ = nullptr;
};

}  // namespace

Derivation derive(const Grammar& grammar, Length width, Length height, std::uint64_t seed, std::string_view start) {
    if (width <= 0 || height <= 0) throw DerivationError("derivation size must be positive");
    if (grammar.starts.empty()) throw DerivationError("grammar has no start symbol");
    return Deriver(grammar, seed).run(width, height, start.empty() ? std::string_view(grammar.start()) : start);
}

}  // namespace facadegram
