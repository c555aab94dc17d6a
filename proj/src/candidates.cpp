#include "facadegram/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include "facadegram/errors.hpp"

namespace facadegram {

std::vector<SplitLine> valid_split_lines(const Layout& layout, const Region& region, Axis axis) {
    const Length lo = region.rect.lo(axis), hi = region.rect.hi(axis);
    std::vector<Length> coords;
    for (int id : region.terminal_ids) {
        const Rect t = layout.terminals[id].rect();
        if (t.lo(axis) > lo) coords.push_back(t.lo(axis));
        if (t.hi(axis) < hi) coords.push_back(t.hi(axis));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    // blocked[i] > 0 when some terminal strictly spans coords[i].
    std::vector<int> blocked(coords.size() + 1, 0);
    for (int id : region.terminal_ids) {
        const Rect t = layout.terminals[id].rect();
        const auto first = std::upper_bound(coords.begin(), coords.end(), t.lo(axis)) - coords.begin();
        const auto last = std::lower_bound(coords.begin(), coords.end(), t.hi(axis)) - coords.begin();
        if (first < last) {
            ++blocked[first];
            --blocked[last];
        }
    }
    std::vector<SplitLine> out;
    int running = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        running += blocked[i];
        if (running == 0) out.push_back({axis, coords[i] - lo});
    }
    return out;
}

std::vector<SplitLine> valid_split_lines(const Layout& layout, const Region& region) {
    auto out = valid_split_lines(layout, region, Axis::x);
    auto ys = valid_split_lines(layout, region, Axis::y);
    out.insert(out.end(), ys.begin(), ys.end());
    return out;
}

std::vector<InstanceRef> instances_inside(const Region& region, const SymmetryIndex& index) {
    std::vector<InstanceRef> out;
    for (const auto* set : index.sorted_sets()) {
        for (const auto& inst : set->instances)
            if (region.rect.contains(inst.rect)) out.push_back({inst.rect, set->terminal_count()});
    }
    return out;
}

double cut_cost(const SplitLine& line, const Region& region, std::span<const InstanceRef> inside) {
    if (region.size() == 0) return 0.0;
    const Length c = region.rect.lo(line.axis) + line.coordinate;
    std::size_t cut = 0;
    for (const auto& inst : inside)
        if (inst.rect.lo(line.axis) < c && c < inst.rect.hi(line.axis)) cut += inst.terminals;
    return static_cast<double>(cut) / static_cast<double>(region.size());
}

double cut_cost(const SplitLine& line, const Region& region, const SymmetryIndex& index) {
    const auto inside = instances_inside(region, index);
    return cut_cost(line, region, inside);
}

double heuristic(const CandidateRule& rule, const CostModel& cost, const HeuristicConfig& config) {
    double cuts = 0.0;
    for (double c : rule.line_costs) cuts += c;
    return config.lambda1 * cost.rule_cost(rule.op, rule.listed) + config.lambda2 * cuts;
}

namespace {

int op_rank(OpKind op) {
    switch (op) {
        case OpKind::repeat: return 0;
        case OpKind::repeat_aba: return 1;
        case OpKind::symsplit: return 2;
        case OpKind::gridsplit: return 3;
        case OpKind::split: return 4;
    }
    return 5;
}

class Builder {
public:
    Builder(RegionCache& regions, const Region& region, std::span<const InstanceRef> inside, const CostModel& cost,
            const HeuristicConfig& config)
        : regions_(regions), region_(region), inside_(inside), cost_(cost), config_(config) {}

    // A one-axis rule whose children are the intervals between consecutive cuts.
    void add(OpKind op, Axis axis, std::vector<Length> cuts, std::vector<int> slots, std::size_t listed) {
        CandidateRule c;
        c.op = op;
        c.axis = axis;
        const Rect local{0, 0, region_.rect.w, region_.rect.h};
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) c.children.push_back(slab(local, axis, cuts[i], cuts[i + 1]));
        for (std::size_t i = 1; i + 1 < cuts.size(); ++i) c.lines.push_back({axis, cuts[i]});
        if (slots.size() != c.children.size()) throw std::logic_error("candidate slots do not match its children");
        c.cuts = std::move(cuts);
        c.slots = std::move(slots);
        c.listed = listed;
        finish(std::move(c));
    }

    void add_grid(const std::vector<Length>& xcuts, const std::vector<Length>& ycuts) {
        CandidateRule c;
        c.op = OpKind::gridsplit;
        c.axis = Axis::x;
        c.cuts = xcuts;
        c.row_cuts = ycuts;
        for (std::size_t r = 0; r + 1 < ycuts.size(); ++r)
            for (std::size_t k = 0; k + 1 < xcuts.size(); ++k) {
                c.children.push_back({xcuts[k], ycuts[r], xcuts[k + 1] - xcuts[k], ycuts[r + 1] - ycuts[r]});
                c.slots.push_back(static_cast<int>(c.children.size() - 1));
            }
        for (std::size_t i = 1; i + 1 < xcuts.size(); ++i) c.lines.push_back({Axis::x, xcuts[i]});
        for (std::size_t i = 1; i + 1 < ycuts.size(); ++i) c.lines.push_back({Axis::y, ycuts[i]});
        c.listed = c.children.size();
        finish(std::move(c));
    }

    std::vector<CandidateRule> take() { return std::move(out_); }

    // Signatures of the slabs between consecutive bounds.
    std::vector<Signature> slab_signatures(Axis axis, const std::vector<Length>& bounds) {
        std::vector<Signature> sigs;
        for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
            sigs.push_back(regions_.get(slab(region_.rect, axis, bounds[i], bounds[i + 1])).sig);
        return sigs;
    }

private:
    void finish(CandidateRule c) {
        auto key = std::make_tuple(c.op, c.axis, c.cuts, c.row_cuts, c.listed);
        if (!seen_.insert(key).second) return;
        c.line_costs.reserve(c.lines.size());
        for (const auto& line : c.lines) {
            const double lc = cut_cost(line, region_, inside_);
            c.line_costs.push_back(lc);
            c.cut_cost += lc;
        }
        c.rule_cost = cost_.rule_cost(c.op, c.listed);
        c.heuristic = heuristic(c, cost_, config_);
        out_.push_back(std::move(c));
    }

    RegionCache& regions_;
    const Region& region_;
    std::span<const InstanceRef> inside_;
    const CostModel& cost_;
    const HeuristicConfig& config_;
    std::set<std::tuple<OpKind, Axis, std::vector<Length>, std::vector<Length>, std::size_t>> seen_;
    std::vector<CandidateRule> out_;
};

std::vector<int> iota_slots(std::size_t n) {
    std::vector<int> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<int>(i);
    return s;
}

// Cuts {0, from, to, extent} with duplicates removed.
std::vector<Length> isolating_cuts(Length from, Length to, Length extent) {
    std::vector<Length> cuts{0, from, to, extent};
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

// Maximal split keeping each slab range in `runs` as one child.
void add_merged(Builder& b, Axis axis, const std::vector<Length>& bounds,
                const std::vector<std::pair<std::size_t, std::size_t>>& runs) {
    std::vector<Length> cuts;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        const bool inner = std::any_of(runs.begin(), runs.end(), [&](const auto& r) { return r.first < k && k < r.second; });
        if (!inner) cuts.push_back(bounds[k]);
    }
    if (cuts.size() < 3) return;
    const std::size_t k = cuts.size() - 1;
    b.add(OpKind::split, axis, std::move(cuts), iota_slots(k), k);
}

void axis_candidates(Builder& b, const Region& region, std::span<const InstanceRef> inside, Axis axis,
                     const std::vector<Length>& bounds, OpSet enabled) {
    const Length extent = region.rect.extent(axis);
    const std::size_t n = bounds.size() - 1;  // slab count, at least 2
    const bool split_on = enabled.contains(OpKind::split);

    if (split_on) {
        // (a) maximal split
        b.add(OpKind::split, axis, bounds, iota_slots(n), n);

        // (b) isolate each repeated instance's slab
        for (const auto& inst : inside) {
            const Length s = inst.rect.lo(axis) - region.rect.lo(axis);
            const Length e = s + inst.rect.extent(axis);
            if (s == 0 && e == extent) continue;
            if (!std::binary_search(bounds.begin(), bounds.end(), s) ||
                !std::binary_search(bounds.begin(), bounds.end(), e))
                continue;
            auto cuts = isolating_cuts(s, e, extent);
            const std::size_t k = cuts.size() - 1;
            b.add(OpKind::split, axis, std::move(cuts), iota_slots(k), k);
        }
    }

    const auto sigs = b.slab_signatures(axis, bounds);

    // (g) isolate maximal periodic runs so a repeat can handle them below,
    // either alone or inside the maximal split
    if (split_on) {
        for (std::size_t p = 1; 2 * p <= n; ++p) {
            std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last) slab ranges
            std::size_t i = 0;
            while (i + p < n) {
                if (sigs[i] != sigs[i + p]) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j + p < n && sigs[j] == sigs[j + p]) ++j;
                const std::size_t len = j - i + p;  // slabs [i, i + len) have period p
                if (len >= 2 * p && !(i == 0 && len == n)) {
                    for (std::size_t use : {len, len - len % p}) {
                        if (use < 2 * p) continue;
                        auto cuts = isolating_cuts(bounds[i], bounds[i + use], extent);
                        const std::size_t k = cuts.size() - 1;
                        b.add(OpKind::split, axis, std::move(cuts), iota_slots(k), k);
                        add_merged(b, axis, bounds, {{i, i + use}});
                    }
                    if (runs.empty() || runs.back().second <= i) runs.push_back({i, i + len});
                }
                i = j + 1;
            }
            if (runs.size() >= 2) add_merged(b, axis, bounds, runs);
        }
    }

    // (c) repeat: whole sequence periodic with at least two periods
    if (enabled.contains(OpKind::repeat)) {
        for (std::size_t p = 1; p < n; ++p) {
            if (n % p != 0) continue;
            bool periodic = true;
            for (std::size_t i = p; i < n && periodic; ++i) periodic = sigs[i] == sigs[i - p];
            if (!periodic) continue;
            std::vector<int> slots(n);
            for (std::size_t i = 0; i < n; ++i) slots[i] = static_cast<int>(i % p);
            b.add(OpKind::repeat, axis, bounds, std::move(slots), p);
        }
    }

    // (d) repeatABA: P (Q P)^m with groups of slabs P != Q
    if (enabled.contains(OpKind::repeat_aba)) {
        for (std::size_t la = 1; la < n; ++la) {
            for (std::size_t lb = 1; la + lb + la <= n; ++lb) {
                const std::size_t period = la + lb;
                if ((n - la) % period != 0) continue;
                bool ok = true;
                for (std::size_t i = period; i < n && ok; ++i) ok = sigs[i] == sigs[i - period];
                if (!ok) continue;
                if (la == lb && std::equal(sigs.begin(), sigs.begin() + la, sigs.begin() + la)) continue;
                std::vector<Length> cuts{0};
                std::vector<int> slots;
                std::size_t at = 0;
                bool a_turn = true;
                while (at < n) {
                    at += a_turn ? la : lb;
                    cuts.push_back(bounds[at]);
                    slots.push_back(a_turn ? 0 : 1);
                    a_turn = !a_turn;
                }
                b.add(OpKind::repeat_aba, axis, std::move(cuts), std::move(slots), 2);
            }
        }
    }

    // (e) symsplit: k mirrored outer slabs on each side around one middle group
    if (enabled.contains(OpKind::symsplit) && n >= 3) {
        for (std::size_t k = 1; 2 * k < n && sigs[k - 1] == sigs[n - k]; ++k) {
            std::vector<Length> cuts(bounds.begin(), bounds.begin() + static_cast<long>(k + 1));
            cuts.insert(cuts.end(), bounds.end() - static_cast<long>(k + 1), bounds.end());
            std::vector<int> slots;
            for (std::size_t i = 0; i <= k; ++i) slots.push_back(static_cast<int>(i));
            for (std::size_t i = k; i-- > 0;) slots.push_back(static_cast<int>(i));
            b.add(OpKind::symsplit, axis, std::move(cuts), std::move(slots), k + 1);
        }
    }
}

std::vector<Length> bounds_of(const std::vector<SplitLine>& lines, Length extent) {
    std::vector<Length> b{0};
    for (const auto& l : lines) b.push_back(l.coordinate);
    b.push_back(extent);
    return b;
}

}  // namespace

bool candidate_less(const CandidateRule& a, const CandidateRule& b) {
    if (a.heuristic != b.heuristic) return a.heuristic < b.heuristic;
    if (op_rank(a.op) != op_rank(b.op)) return op_rank(a.op) < op_rank(b.op);
    if (a.listed != b.listed) return a.listed < b.listed;
    if (a.axis != b.axis) return a.axis < b.axis;
    if (a.cuts != b.cuts) return a.cuts < b.cuts;
    return a.row_cuts < b.row_cuts;
}

std::vector<CandidateRule> enumerate_candidates(RegionCache& regions, const Region& region,
                                                const SymmetryIndex& index, const CostModel& cost,
                                                const HeuristicConfig& config, OpSet enabled) {
    const Layout& layout = regions.grid().layout();
    const auto inside = instances_inside(region, index);
    Builder b(regions, region, inside, cost, config);
    const auto xl = valid_split_lines(layout, region, Axis::x);
    const auto yl = valid_split_lines(layout, region, Axis::y);
    const auto xb = bounds_of(xl, region.rect.w);
    const auto yb = bounds_of(yl, region.rect.h);
    if (!xl.empty()) axis_candidates(b, region, inside, Axis::x, xb, enabled);
    if (!yl.empty()) axis_candidates(b, region, inside, Axis::y, yb, enabled);
    // (f) gridsplit over both maximal splits
    if (enabled.contains(OpKind::gridsplit) && !xl.empty() && !yl.empty()) b.add_grid(xb, yb);

    auto out = b.take();
    std::sort(out.begin(), out.end(), candidate_less);
    if (out.size() > config.max_candidates) out.resize(config.max_candidates);
    return out;
}

std::vector<CandidateRule> enumerate_candidates(const LayoutGrid& grid, const Region& region,
                                                const SymmetryIndex& index, const CostModel& cost,
                                                const HeuristicConfig& config, OpSet enabled) {
    RegionCache regions(grid);
    return enumerate_candidates(regions, region, index, cost, config, enabled);
}

std::vector<double> selection_probabilities(std::span<const double> heuristics) {
    std::vector<double> p(heuristics.size());
    if (p.empty()) return p;
    const double shift = *std::min_element(heuristics.begin(), heuristics.end());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(-(heuristics[i] - shift));
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

std::size_t sample_candidate(std::span<const CandidateRule> candidates, std::mt19937_64& rng) {
    if (candidates.empty()) throw Error("sample_candidate: no candidates");
    std::vector<double> h(candidates.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = candidates[i].heuristic;
    const auto p = selection_probabilities(h);
    const double u = unit_uniform(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return p.size() - 1;
}

Rule to_rule(const CandidateRule& c, std::string lhs, const std::vector<std::string>& child_symbols) {
    if (child_symbols.size() != c.children.size()) throw Error("to_rule: one symbol per child required");
    Rule r;
    r.lhs = std::move(lhs);
    r.op = c.op;
    r.axis = c.axis;
    if (c.op == OpKind::gridsplit) {
        for (std::size_t i = 0; i + 1 < c.cuts.size(); ++i) r.columns.push_back(SizeSpec::absolute(c.cuts[i + 1] - c.cuts[i]));
        for (std::size_t i = 0; i + 1 < c.row_cuts.size(); ++i)
            r.rows.push_back(SizeSpec::absolute(c.row_cuts[i + 1] - c.row_cuts[i]));
        r.cells = child_symbols;
        return r;
    }
    r.successors.resize(c.listed);
    std::vector<bool> filled(c.listed, false);
    for (std::size_t i = 0; i < c.children.size(); ++i) {
        const auto slot = static_cast<std::size_t>(c.slots[i]);
        if (filled[slot]) continue;
        filled[slot] = true;
        r.successors[slot] = {SizeSpec::absolute(c.children[i].extent(c.axis)), child_symbols[i]};
    }
    return r;
}

}  // namespace facadegram
