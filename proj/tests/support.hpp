#pragma once

// Shared fixtures and independent reference implementations used as test oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "facadegram/grammar_io.hpp"
#include "facadegram/layout.hpp"

namespace testing {

using namespace facadegram;

inline std::filesystem::path data_dir() { return FACADEGRAM_DATA_DIR; }

struct NamedLayout {
    std::string name;
    Layout layout;
};

inline std::vector<NamedLayout> corpus() {
    std::vector<NamedLayout> out;
    for (const auto& e : std::filesystem::directory_iterator(data_dir() / "corpus"))
        if (e.path().extension() == ".json") out.push_back({e.path().stem().string(), load_layout(e.path())});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

inline Layout corpus_layout(const std::string& name) { return load_layout(data_dir() / "corpus" / (name + ".json")); }

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

// A horizontal strip of (width, label) cells of the given height.
inline Layout strip(const std::vector<std::pair<Length, Label>>& cells, Length height = 1000,
                    std::vector<std::string> materials = {"transparent", "A", "B", "C", "D"}) {
    Layout l;
    l.materials = std::move(materials);
    Length x = 0;
    for (const auto& [w, label] : cells) {
        l.terminals.push_back({x, 0, w, height, label});
        x += w;
    }
    l.width = x;
    l.height = height;
    return l;
}

// Random guillotine tiling on a coarse lattice with few labels, so that
// repeated content is common.
inline Layout random_tiling(std::mt19937_64& rng, int max_terminals, int labels = 2) {
    Layout l;
    l.materials = {"transparent"};
    for (int i = 1; i <= labels; ++i) l.materials.push_back("M" + std::to_string(i));
    std::uniform_int_distribution<int> cells(2, 6);
    l.width = cells(rng) * 100;
    l.height = cells(rng) * 100;
    std::vector<Rect> pending{l.domain()};
    std::vector<Rect> done;
    std::uniform_int_distribution<int> pct(0, 99);
    while (!pending.empty()) {
        const Rect r = pending.back();
        pending.pop_back();
        const int total = static_cast<int>(done.size() + pending.size()) + 1;
        const bool can_x = r.w >= 200, can_y = r.h >= 200;
        if (total >= max_terminals || (!can_x && !can_y) || pct(rng) < 20) {
            done.push_back(r);
            continue;
        }
        const Axis axis = can_x && (!can_y || pct(rng) < 50) ? Axis::x : Axis::y;
        std::uniform_int_distribution<Length> at(1, r.extent(axis) / 100 - 1);
        const Length cut = at(rng) * 100;
        pending.push_back(slab(r, axis, 0, cut));
        pending.push_back(slab(r, axis, cut, r.extent(axis)));
    }
    std::uniform_int_distribution<int> lab(1, labels);
    for (const auto& r : done) l.terminals.push_back({r.x, r.y, r.w, r.h, lab(rng)});
    return canonicalize(l);
}

// ---------------------------------------------------------------------------
// Symmetry oracle: enumerate every tiled rectangle, key it by a plain-text
// serialization of its translated content, then take the closure of growing
// from repeated single terminals.

struct BruteRegion {
    Rect rect;
    std::string key;
};

class BruteSymmetry {
public:
    explicit BruteSymmetry(const Layout& l) : l_(l) {
        std::set<Length> xs{0, l.width}, ys{0, l.height};
        for (const auto& t : l.terminals) {
            xs.insert(t.x);
            xs.insert(t.x + t.w);
            ys.insert(t.y);
            ys.insert(t.y + t.h);
        }
        xs_.assign(xs.begin(), xs.end());
        ys_.assign(ys.begin(), ys.end());
        for (std::size_t a = 0; a < xs_.size(); ++a)
            for (std::size_t b = a + 1; b < xs_.size(); ++b)
                for (std::size_t c = 0; c < ys_.size(); ++c)
                    for (std::size_t d = c + 1; d < ys_.size(); ++d) {
                        const Rect r{xs_[a], ys_[c], xs_[b] - xs_[a], ys_[d] - ys_[c]};
                        if (auto k = key(r)) by_key_[*k].push_back(r);
                    }
    }

    // Key of a rect exactly covered by whole terminals, or nothing.
    std::optional<std::string> key(const Rect& r) const {
        std::vector<std::tuple<Length, Length, Length, Length, Label>> inside;
        Length area = 0;
        for (const auto& t : l_.terminals) {
            const Rect tr = t.rect();
            const bool in = tr.x >= r.x && tr.y >= r.y && tr.right() <= r.right() && tr.top() <= r.top();
            const bool touches = tr.x < r.right() && r.x < tr.right() && tr.y < r.top() && r.y < tr.top();
            if (touches && !in) return std::nullopt;
            if (in) {
                inside.emplace_back(tr.y - r.y, tr.x - r.x, tr.w, tr.h, t.label);
                area += tr.area();
            }
        }
        if (area != r.area()) return std::nullopt;
        std::sort(inside.begin(), inside.end());
        std::ostringstream os;
        os << r.w << 'x' << r.h;
        for (const auto& [y, x, w, h, lab] : inside) os << ';' << x << ',' << y << ',' << w << ',' << h << ',' << lab;
        return os.str();
    }

    std::size_t occurrences(const std::string& k) const {
        auto it = by_key_.find(k);
        return it == by_key_.end() ? 0 : it->second.size();
    }

    // Smallest tiled extension of r toward one side, scanning lattice coordinates.
    std::optional<Rect> grow(const Rect& r, int dir) const {
        if (dir == 0) {  // left
            for (auto it = xs_.rbegin(); it != xs_.rend(); ++it)
                if (*it < r.x && key({*it, r.y, r.right() - *it, r.h})) return Rect{*it, r.y, r.right() - *it, r.h};
        } else if (dir == 1) {  // right
            for (Length x : xs_)
                if (x > r.right() && key({r.x, r.y, x - r.x, r.h})) return Rect{r.x, r.y, x - r.x, r.h};
        } else if (dir == 2) {  // down
            for (auto it = ys_.rbegin(); it != ys_.rend(); ++it)
                if (*it < r.y && key({r.x, *it, r.w, r.top() - *it})) return Rect{r.x, *it, r.w, r.top() - *it};
        } else {  // up
            for (Length y : ys_)
                if (y > r.top() && key({r.x, r.y, r.w, y - r.y})) return Rect{r.x, r.y, r.w, y - r.y};
        }
        return std::nullopt;
    }

    // Every repeated content reachable from repeated terminals, mapped to its sorted instance rects.
    std::map<std::string, std::vector<Rect>> closure() const {
        std::map<std::string, std::vector<Rect>> out;
        std::vector<std::string> work;
        for (const auto& t : l_.terminals) {
            const auto k = *key(t.rect());
            if (occurrences(k) >= 2 && !out.count(k)) {
                out[k] = sorted(by_key_.at(k));
                work.push_back(k);
            }
        }
        while (!work.empty()) {
            const std::string k = work.back();
            work.pop_back();
            for (const auto& r : by_key_.at(k))
                for (int d = 0; d < 4; ++d) {
                    auto g = grow(r, d);
                    if (!g) continue;
                    const auto gk = *key(*g);
                    if (occurrences(gk) >= 2 && !out.count(gk)) {
                        out[gk] = sorted(by_key_.at(gk));
                        work.push_back(gk);
                    }
                }
        }
        return out;
    }

    const std::map<std::string, std::vector<Rect>>& all() const { return by_key_; }

private:
    static std::vector<Rect> sorted(std::vector<Rect> v) {
        std::sort(v.begin(), v.end(), BottomLeftOrder{});
        return v;
    }

    const Layout& l_;
    std::vector<Length> xs_, ys_;
    std::map<std::string, std::vector<Rect>> by_key_;
};

// ---------------------------------------------------------------------------
// Exhaustive minimum grammar cost for a 1D row of slabs. Contents are slab
// sequences; single slabs are terminals. A grammar assigns one rule to each
// compound content it reaches; its cost is the sum over those contents.

struct RowOps {
    bool split = true, repeat = true, repeat_aba = true, symsplit = true;
};

class RowGrammarOracle {
public:
    using Seq = std::vector<int>;  // slab ids: equal ids mean equal (label, size)

    RowGrammarOracle(RowOps ops, std::array<double, 5> op_cost = {0.1, 0.5, 0.5, 0.5, 0.1})
        : ops_(ops), op_cost_(op_cost) {}

    double minimum(const Seq& row) {
        best_ = std::numeric_limits<double>::infinity();
        std::map<Seq, std::string> assigned;
        std::vector<Seq> pending;
        if (row.size() == 1) return op_cost_[0] + 1.0;  // root wrapper rule
        pending.push_back(row);
        search(pending, assigned, 0.0);
        return best_;
    }

private:
    struct Option {
        double cost;
        std::vector<Seq> children;  // compound children only
        std::string text;
    };

    static std::vector<std::vector<Seq>> partitions(const Seq& s, bool allow_whole) {
        std::vector<std::vector<Seq>> out;
        const std::size_t n = s.size();
        for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
            if (mask == 0 && !allow_whole) continue;
            std::vector<Seq> parts;
            Seq cur{s[0]};
            for (std::size_t i = 1; i < n; ++i) {
                if (mask & (1u << (i - 1))) {
                    parts.push_back(cur);
                    cur.clear();
                }
                cur.push_back(s[i]);
            }
            parts.push_back(cur);
            out.push_back(parts);
        }
        return out;
    }

    void add(std::vector<Option>& opts, double c, const std::vector<Seq>& parts, const char* op = "") {
        Option o{c, {}, op};
        for (const auto& p : parts) {
            o.text += ' ';
            for (int v : p) o.text += char('A' + v);
        }
        for (const auto& p : parts)
            if (p.size() > 1) o.children.push_back(p);
        opts.push_back(o);
    }

    std::vector<Option> options(const Seq& s) {
        std::vector<Option> opts;
        const std::size_t n = s.size();
        if (ops_.split)
            for (const auto& parts : partitions(s, false)) add(opts, op_cost_[0] + double(parts.size()), parts, "split");
        if (ops_.repeat)
            for (std::size_t p = 1; p < n; ++p) {
                if (n % p) continue;
                bool ok = true;
                for (std::size_t i = p; i < n && ok; ++i) ok = s[i] == s[i - p];
                if (!ok) continue;
                const Seq pat(s.begin(), s.begin() + p);
                for (const auto& parts : partitions(pat, true)) add(opts, op_cost_[1] + double(parts.size()), parts, "repeat");
            }
        if (ops_.repeat_aba)
            for (std::size_t a = 1; a < n; ++a)
                for (std::size_t b = 1; 2 * a + b <= n; ++b) {
                    if ((n - a) % (a + b)) continue;
                    bool ok = true;
                    for (std::size_t i = a + b; i < n && ok; ++i) ok = s[i] == s[i - a - b];
                    if (!ok) continue;
                    const Seq A(s.begin(), s.begin() + a), B(s.begin() + a, s.begin() + a + b);
                    add(opts, op_cost_[2] + 2.0, {A, B}, "repeatABA");
                }
        if (ops_.symsplit)
            // alpha = parts q1..qm, expansion q1..qm q(m-1)..q1
            for (const auto& parts : partitions(s, false)) {
                const std::size_t k = parts.size();
                if (k < 3 || k % 2 == 0) continue;
                bool ok = true;
                for (std::size_t i = 0; i < k / 2 && ok; ++i) ok = parts[i] == parts[k - 1 - i];
                if (!ok) continue;
                std::vector<Seq> listed(parts.begin(), parts.begin() + static_cast<long>(k / 2 + 1));
                add(opts, op_cost_[3] + double(listed.size()), listed, "symsplit");
            }
        return opts;
    }

    void search(std::vector<Seq> pending, std::map<Seq, std::string>& assigned, double cost) {
        if (cost >= best_ - 1e-12) return;
        while (!pending.empty() && assigned.count(pending.back())) pending.pop_back();
        if (pending.empty()) {
            best_ = cost;
            best_rules_.clear();
            for (const auto& [seq, text] : assigned) {
                std::string lhs;
                for (int v : seq) lhs += char('A' + v);
                best_rules_.push_back(lhs + " ->" + text);
            }
            return;
        }
        const Seq s = pending.back();
        pending.pop_back();
        for (const auto& o : options(s)) {
            assigned[s] = o.text;
            auto next = pending;
            for (const auto& c : o.children) next.push_back(c);
            search(next, assigned, cost + o.cost);
            assigned.erase(s);
        }
    }

    RowOps ops_;
    std::array<double, 5> op_cost_;
    double best_ = 0.0;
    std::vector<std::string> best_rules_;

public:
    // Rules of the last minimum found, one "lhs -> op parts" string each.
    const std::vector<std::string>& best_rules() const { return best_rules_; }
};

// Slab ids of a horizontal strip: equal (width, label) gives equal id.
inline RowGrammarOracle::Seq row_sequence(const Layout& l) {
    std::map<std::pair<Length, Label>, int> ids;
    auto c = canonicalize(l);
    RowGrammarOracle::Seq s;
    for (const auto& t : c.terminals) s.push_back(ids.emplace(std::make_pair(t.w, t.label), int(ids.size())).first->second);
    return s;
}

}  // namespace testing
