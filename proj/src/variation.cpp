#include "facadegram/variation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "facadegram/errors.hpp"
#include "facadegram/region.hpp"

namespace facadegram {

namespace {

void convert_sizes(std::vector<SizeSpec*>& sizes, Length thin) {
    auto is_thin = [&](const SizeSpec* s) { return !s->is_relative() && s->value <= static_cast<double>(thin); };
    const bool all_thin = std::all_of(sizes.begin(), sizes.end(), is_thin);
    for (auto* s : sizes) {
        if (s->is_relative()) continue;
        if (all_thin || !is_thin(s)) *s = SizeSpec::relative(s->value / static_cast<double>(kUnitsPerMeter));
    }
}

}  // namespace

Grammar make_size_independent(const Grammar& grammar, Length thin_threshold) {
    Grammar out = grammar;
    for (auto& rule : out.rules) {
        if (rule.op == OpKind::gridsplit) {
            std::vector<SizeSpec*> cols, rows;
            for (auto& c : rule.columns) cols.push_back(&c);
            for (auto& r : rule.rows) rows.push_back(&r);
            convert_sizes(cols, thin_threshold);
            convert_sizes(rows, thin_threshold);
        } else {
            std::vector<SizeSpec*> sizes;
            for (auto& s : rule.successors) sizes.push_back(&s.size);
            convert_sizes(sizes, thin_threshold);
        }
    }
    return out;
}

Derivation derive_resized(const Grammar& grammar, Length width, Length height, std::uint64_t seed) {
    if (width <= 0 || height <= 0) throw InfeasibleError("target dimensions must be positive");
    return derive(grammar, width, height, seed);
}

AlignmentProblem alignment_problem(const Derivation& derivation) {
    AlignmentProblem p;
    p.layout = derivation.layout;
    std::unordered_map<Rect, int, RectHash> id_of;
    for (int i = 0; i < static_cast<int>(p.layout.terminals.size()); ++i) id_of[p.layout.terminals[i].rect()] = i;
    // Leaves reached through the same chain of (rule, slot) steps from the
    // root were given the same nominal size by the grammar.
    std::map<std::vector<std::pair<int, int>>, std::vector<int>> by_slot;
    const auto& nodes = derivation.tree.nodes;
    for (const auto& node : nodes) {
        if (!node.is_leaf() || node.parent < 0) continue;
        std::vector<std::pair<int, int>> path;
        for (const SplitNode* n = &node; n->parent >= 0; n = &nodes[n->parent]) path.push_back({nodes[n->parent].rule, n->slot});
        by_slot[path].push_back(id_of.at(node.rect));
    }
    for (auto& [key, ids] : by_slot) {
        if (ids.size() < 2) continue;
        std::sort(ids.begin(), ids.end());
        p.groups.push_back(std::move(ids));
    }
    return p;
}

Layout align_layout(const AlignmentProblem& problem) { return regularize(problem.layout, problem.groups); }

namespace {

// Content signature of the region each non-terminal first covers.
std::map<std::string, Signature> symbol_signatures(const Grammar& g) {
    if (!g.source_size) throw ValidationError("merging needs grammars that record their source size");
    const auto [w, h] = *g.source_size;
    const Derivation d = derive(g, w, h, 0);
    const LayoutGrid grid(d.layout);
    std::map<std::string, Signature> out;
    for (const auto& node : d.tree.nodes) {
        if (node.is_leaf() || out.count(node.symbol)) continue;
        out.emplace(node.symbol, signature(d.layout, grid.region(node.rect)));
    }
    return out;
}

}  // namespace

MergeResult merge_grammars(std::span<const Grammar> grammars, std::span<const double> weights) {
    if (grammars.empty()) throw ValidationError("nothing to merge");
    if (weights.size() != grammars.size()) throw ValidationError("one weight per grammar is required");
    for (double w : weights)
        if (!(w > 0.0)) throw ValidationError("merge weights must be positive");
    for (const auto& g : grammars)
        if (g.materials != grammars.front().materials) throw ValidationError("grammars use different material tables");

    // Symbol identity: content signature when derived, otherwise (grammar, name).
    using Key = std::pair<int, std::string>;  // grammar -1 marks a signature key (hex)
    std::map<Key, std::string> names;
    std::set<std::string> used;
    std::map<std::string, std::set<int>> sources;
    std::vector<std::map<std::string, std::string>> rename(grammars.size());
    for (const auto& m : grammars.front().materials) used.insert(m);

    for (std::size_t gi = 0; gi < grammars.size(); ++gi) {
        const Grammar& g = grammars[gi];
        const auto sigs = symbol_signatures(g);
        std::vector<std::string> symbols;
        for (const auto& r : g.rules) symbols.push_back(r.lhs);
        for (const auto& s : g.starts) symbols.push_back(s);
        for (const auto& sym : symbols) {
            if (rename[gi].count(sym)) continue;
            auto it = sigs.find(sym);
            const Key key = it != sigs.end() ? Key{-1, it->second.hex()} : Key{static_cast<int>(gi), sym};
            auto known = names.find(key);
            if (known == names.end()) {
                std::string name = sym;
                for (int k = 2; used.count(name); ++k) name = sym + "_" + std::to_string(k);
                used.insert(name);
                known = names.emplace(key, name).first;
            }
            rename[gi][sym] = known->second;
            sources[known->second].insert(static_cast<int>(gi));
        }
    }

    MergeResult res;
    Grammar& out = res.grammar;
    out.materials = grammars.front().materials;
    auto sym = [&](std::size_t gi, const std::string& s) {
        auto it = rename[gi].find(s);
        return it == rename[gi].end() ? s : it->second;
    };

    std::vector<std::string> roots;
    for (std::size_t gi = 0; gi < grammars.size(); ++gi) {
        const std::string root = sym(gi, grammars[gi].start());
        if (std::find(roots.begin(), roots.end(), root) == roots.end()) roots.push_back(root);
        for (const auto& r : grammars[gi].rules) {
            Rule nr = r;
            nr.lhs = sym(gi, r.lhs);
            for (auto& s : nr.successors) s.symbol = sym(gi, s.symbol);
            for (auto& c : nr.cells) c = sym(gi, c);
            nr.weight = r.weight * weights[gi];
            auto same = std::find_if(out.rules.begin(), out.rules.end(), [&](const Rule& o) {
                Rule a = o, b = nr;
                a.weight = b.weight = 0.0;
                return a == b;
            });
            if (same != out.rules.end()) same->weight += nr.weight;
            else out.rules.push_back(std::move(nr));
        }
    }

    if (roots.size() == 1) {
        out.starts = {roots.front()};
    } else {
        std::string start = "Start";
        for (int k = 2; used.count(start); ++k) start = "Start_" + std::to_string(k);
        out.starts = {start};
        for (std::size_t gi = 0; gi < grammars.size(); ++gi) {
            const std::string root = sym(gi, grammars[gi].start());
            auto same = std::find_if(out.rules.begin(), out.rules.end(), [&](const Rule& o) {
                return o.lhs == start && o.successors.front().symbol == root;
            });
            if (same != out.rules.end()) {
                same->weight += weights[gi];
                continue;
            }
            Rule r;
            r.lhs = start;
            r.op = OpKind::split;
            r.axis = Axis::x;
            r.successors.push_back({SizeSpec::relative(1.0), root});
            r.weight = weights[gi];
            out.rules.push_back(std::move(r));
        }
    }

    std::map<std::string, std::size_t> per_lhs;
    for (const auto& r : out.rules) ++per_lhs[r.lhs];
    for (auto& r : out.rules)
        if (per_lhs[r.lhs] == 1) r.weight = 1.0;
    if (grammars.size() == 1 || std::all_of(grammars.begin(), grammars.end(), [&](const Grammar& g) {
            return g.source_size == grammars.front().source_size;
        }))
        out.source_size = grammars.front().source_size;

    res.stats.symbols = per_lhs.size();
    for (const auto& [name, from] : sources)
        if (from.size() >= 2 && per_lhs.count(name)) ++res.stats.unified;
    for (const auto& [lhs, n] : per_lhs)
        if (n > 1) ++res.stats.stochastic_symbols;
    check_grammar(out);
    return res;
}

}  // namespace facadegram
