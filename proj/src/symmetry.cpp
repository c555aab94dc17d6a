#include "facadegram/symmetry.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "facadegram/errors.hpp"

namespace facadegram {

double importance_score(const RepeatedRegionSet& set) {
    const double a = static_cast<double>(set.terminal_count());
    const double o = static_cast<double>(set.occurrence_count());
    return (a - 1.0) * (o - 1.0);
}

const RepeatedRegionSet* SymmetryIndex::find(const Signature& sig) const {
    auto it = sets_.find(sig);
    return it == sets_.end() ? nullptr : &it->second;
}

void SymmetryIndex::insert(RepeatedRegionSet set) {
    const Signature sig = set.sig;
    sets_.insert_or_assign(sig, std::move(set));
}

bool SymmetryIndex::erase(const Signature& sig) { return sets_.erase(sig) > 0; }

std::vector<const RepeatedRegionSet*> SymmetryIndex::sorted_sets() const {
    std::vector<const RepeatedRegionSet*> out;
    out.reserve(sets_.size());
    for (const auto& [sig, set] : sets_) out.push_back(&set);
    std::sort(out.begin(), out.end(), [](const RepeatedRegionSet* a, const RepeatedRegionSet* b) {
        const Rect& ra = a->instances.front().rect;
        const Rect& rb = b->instances.front().rect;
        if (ra != rb) return BottomLeftOrder{}(ra, rb);
        return a->sig < b->sig;
    });
    return out;
}

std::string SymmetryIndex::dump() const {
    std::ostringstream os;
    for (const auto* set : sorted_sets()) {
        os << set->sig.hex().substr(0, 12) << " a=" << set->terminal_count() << " o=" << set->occurrence_count();
        for (const auto& inst : set->instances) os << ' ' << inst.rect;
        os << '\n';
    }
    return os.str();
}

std::optional<Region> grow_region(const LayoutGrid& grid, const Region& region, Direction dir) {
    const Rect r = region.rect;
    auto attempt = [&](const Rect& c) -> std::optional<Region> {
        if (grid.is_tiled(c)) return grid.region(c);
        return std::nullopt;
    };
    switch (dir) {
        case Direction::right: {
            const auto& xs = grid.xs();
            for (auto it = std::upper_bound(xs.begin(), xs.end(), r.right()); it != xs.end(); ++it)
                if (auto g = attempt({r.x, r.y, *it - r.x, r.h})) return g;
            break;
        }
        case Direction::left: {
            const auto& xs = grid.xs();
            auto it = std::lower_bound(xs.begin(), xs.end(), r.x);
            while (it != xs.begin()) {
                --it;
                if (auto g = attempt({*it, r.y, r.right() - *it, r.h})) return g;
            }
            break;
        }
        case Direction::top: {
            const auto& ys = grid.ys();
            for (auto it = std::upper_bound(ys.begin(), ys.end(), r.top()); it != ys.end(); ++it)
                if (auto g = attempt({r.x, r.y, r.w, *it - r.y})) return g;
            break;
        }
        case Direction::bottom: {
            const auto& ys = grid.ys();
            auto it = std::lower_bound(ys.begin(), ys.end(), r.y);
            while (it != ys.begin()) {
                --it;
                if (auto g = attempt({r.x, *it, r.w, r.top() - *it})) return g;
            }
            break;
        }
    }
    return std::nullopt;
}

std::vector<Region> find_occurrences(const LayoutGrid& grid, const Region& region) {
    const Layout& layout = grid.layout();
    const auto content = canonical_content(layout, region);
    std::vector<Region> out;
    if (content.empty()) return out;
    // The terminal at the region's lower-left corner anchors every occurrence.
    const TerminalRect& anchor = content.front();
    for (const auto& t : layout.terminals) {
        if (t.w != anchor.w || t.h != anchor.h || t.label != anchor.label) continue;
        const Rect cand{t.x, t.y, region.rect.w, region.rect.h};
        if (cand.right() > layout.width || cand.top() > layout.height) continue;
        if (!grid.is_tiled(cand)) continue;
        Region r = grid.region(cand);
        if (r.size() != content.size()) continue;
        if (canonical_content(layout, r) == content) out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(),
              [](const Region& a, const Region& b) { return BottomLeftOrder{}(a.rect, b.rect); });
    return out;
}

SymmetryIndex build_symmetry_index(const LayoutGrid& grid) {
    const Layout& layout = grid.layout();
    SymmetryIndex index;
    std::deque<Signature> work;
    // Contents already known to occur only once.
    std::unordered_map<Signature, Region, SignatureHash> unique;

    auto add = [&](const Region& r, const Signature& sig) {
        const Region* known = nullptr;
        if (const auto* existing = index.find(sig)) known = &existing->instances.front();
        else if (auto it = unique.find(sig); it != unique.end()) known = &it->second;
        if (known) {
            if (!same_content(layout, *known, layout, r))
                throw Error("signature collision between congruence classes at " + sig.hex());
            return;
        }
        auto occurrences = find_occurrences(grid, r);
        if (occurrences.size() < 2) {
            unique.emplace(sig, r);
            return;
        }
        index.insert({sig, std::move(occurrences)});
        work.push_back(sig);
    };

    std::vector<int> order(layout.terminals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return BottomLeftOrder{}(layout.terminals[a].rect(), layout.terminals[b].rect());
    });
    for (int id : order) {
        const Region r{layout.terminals[id].rect(), {id}};
        add(r, signature(layout, r));
    }

    while (!work.empty()) {
        const Signature sig = work.front();
        work.pop_front();
        // Copy: `add` may rehash the index.
        const std::vector<Region> instances = index.find(sig)->instances;
        for (const auto& inst : instances) {
            for (Direction dir : kDirections) {
                auto grown = grow_region(grid, inst, dir);
                if (!grown) continue;
                add(*grown, signature(layout, *grown));
            }
        }
    }
    return index;
}

}  // namespace facadegram
