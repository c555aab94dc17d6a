#include "facadegram/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "facadegram/errors.hpp"
#include "facadegram/grammar_io.hpp"

namespace facadegram {

const char* to_string(Method m) {
    switch (m) {
        case Method::adp: return "adp";
        case Method::greedy: return "greedy";
        case Method::importance_sampling: return "is";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    if (name == "adp") return Method::adp;
    if (name == "greedy") return Method::greedy;
    if (name == "is") return Method::importance_sampling;
    return std::nullopt;
}

double SearchConfig::epsilon(int t) const { return epsilon0 * std::exp(-static_cast<double>(t) / effective_tau()); }

void SearchConfig::validate() const {
    if (iterations < 1) throw ValidationError("iterations must be at least 1");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ValidationError("epsilon0 must lie in [0, 1]");
    if (!(effective_tau() > 0.0)) throw ValidationError("tau must be positive");
    if (heuristic.lambda1 < 0.0 || heuristic.lambda2 < 0.0) throw ValidationError("lambda weights must be non-negative");
    if (heuristic.max_candidates < 1) throw ValidationError("max_candidates must be at least 1");
    for (double c : cost.op_cost)
        if (c < 0.0) throw ValidationError("operator costs must be non-negative");
    if (cost.per_symbol_cost < 0.0) throw ValidationError("per-symbol cost must be non-negative");
    if (threads < 1) throw ValidationError("threads must be at least 1");
}

const ValueEntry* ValueTable::find(const Signature& sig) const {
    auto it = entries_.find(sig);
    return it == entries_.end() ? nullptr : &it->second;
}

bool ValueTable::offer(const Signature& sig, double value, const CandidateRule& action) {
    auto it = entries_.find(sig);
    if (it == entries_.end()) {
        entries_.emplace(sig, ValueEntry{value, action});
        return true;
    }
    if (value < it->second.value) {
        it->second = {value, action};
        return true;
    }
    return false;
}

void ValueTable::merge(const ValueTable& other) {
    std::vector<const std::pair<const Signature, ValueEntry>*> items;
    items.reserve(other.entries_.size());
    for (const auto& kv : other.entries_) items.push_back(&kv);
    std::sort(items.begin(), items.end(), [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* kv : items) offer(kv->first, kv->second.value, kv->second.action);
}

namespace {

// Geometry of a rule application at a split-tree node, as a candidate.
CandidateRule action_of(const SplitTree& tree, const SplitNode& node, const Rule& rule, const CostModel& cost) {
    CandidateRule c;
    c.op = rule.op;
    c.axis = rule.axis;
    c.listed = rule.listed();
    c.rule_cost = cost.rule_cost(rule);
    for (int child : node.children) {
        const auto& cn = tree.nodes[child];
        c.children.push_back(cn.rect.translated(-node.rect.x, -node.rect.y));
        c.slots.push_back(cn.slot);
    }
    if (rule.op == OpKind::gridsplit) {
        const std::size_t cols = rule.columns.size();
        c.cuts.push_back(0);
        for (std::size_t i = 0; i < cols; ++i) c.cuts.push_back(c.children[i].right());
        c.row_cuts.push_back(0);
        for (std::size_t r = 0; r < rule.rows.size(); ++r) c.row_cuts.push_back(c.children[r * cols].top());
    } else {
        c.cuts.push_back(0);
        for (const auto& ch : c.children) c.cuts.push_back(ch.hi(rule.axis));
    }
    return c;
}

}  // namespace

double update_value_table(ValueTable& table, const SplitTree& tree, const Grammar& grammar, const LayoutGrid& grid,
                          const CostModel& cost) {
    const Layout& layout = grid.layout();
    std::vector<double> value(tree.nodes.size(), 0.0);
    std::vector<Signature> sig(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) sig[i] = signature(layout, grid.region(tree.nodes[i].rect));
    // Children always follow their parent in the node list.
    for (std::size_t k = tree.nodes.size(); k-- > 0;) {
        const auto& node = tree.nodes[k];
        if (node.is_leaf()) continue;
        const Rule& rule = grammar.rules[static_cast<std::size_t>(node.rule)];
        double v = cost.rule_cost(rule);
        std::vector<Signature> seen;
        for (int child : node.children) {
            if (tree.nodes[child].is_leaf()) continue;
            if (std::find(seen.begin(), seen.end(), sig[child]) != seen.end()) continue;
            seen.push_back(sig[child]);
            v += value[child];
        }
        value[k] = v;
        table.offer(sig[k], v, action_of(tree, node, rule, cost));
    }
    return tree.nodes.empty() ? 0.0 : value[0];
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t iteration_seed(std::uint64_t seed, int t) {
    return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(t) * 0xd1b54a32d192ed03ULL);
}

struct ChildInfo {
    Signature sig;
    Label label = -1;  // terminal label, -1 for compound children
};

struct CandidateSet {
    std::vector<CandidateRule> rules;
    std::vector<std::vector<ChildInfo>> children;  // parallel to rules
};

// Immutable per-layout data shared across threads.
struct LayoutContext {
    const Layout* layout;
    std::unique_ptr<LayoutGrid> grid;
    const SymmetryIndex* index;
    std::unique_ptr<SymmetryIndex> owned_index;
};

// Per-thread caches.
struct Workspace {
    std::vector<std::unique_ptr<RegionCache>> regions;
    std::vector<std::unordered_map<Signature, CandidateSet, SignatureHash>> candidates;
};

struct Choice {
    const CandidateSet* set = nullptr;
    std::size_t index = 0;
    int layout = 0;
    Rect rect;
};

struct RootInfo {
    Signature sig;
    Label label = -1;  // single-terminal layout
    Length height = 0;
};

struct IterationResult {
    bool aborted = false;
    double cost = std::numeric_limits<double>::infinity();
    std::unordered_map<Signature, Choice, SignatureHash> choices;
    std::vector<Signature> order;  // signatures in the order rules were chosen
    std::vector<RootInfo> roots;
    double ms = 0.0;
};

struct FrontierItem {
    int layout;
    Rect rect;
    bool operator>(const FrontierItem& o) const {
        if (layout != o.layout) return layout > o.layout;
        return BottomLeftOrder{}(o.rect, rect);
    }
};

class Search {
public:
    Search(std::span<const Layout> layouts, const SymmetryIndex* index, const SearchConfig& config, Method method)
        : config_(config), method_(method) {
        config_.validate();
        if (method_ == Method::greedy) config_.iterations = 1;
        for (std::size_t i = 0; i < layouts.size(); ++i) {
            if (layouts[i].materials != layouts.front().materials)
                throw ValidationError("layouts must share one material table");
            LayoutContext ctx;
            ctx.layout = &layouts[i];
            ctx.grid = std::make_unique<LayoutGrid>(layouts[i]);
            if (index && layouts.size() == 1) {
                ctx.index = index;
            } else {
                ctx.owned_index = std::make_unique<SymmetryIndex>(build_symmetry_index(*ctx.grid));
                ctx.index = ctx.owned_index.get();
            }
            contexts_.push_back(std::move(ctx));
        }
    }

    SearchReport run() {
        const auto start = Clock::now();
        SearchReport report;
        report.method = method_;
        const int threads = std::max(1, config_.threads);
        std::vector<Workspace> spaces(static_cast<std::size_t>(threads));
        for (auto& ws : spaces) init_workspace(ws);

        std::optional<Grammar> best;
        double best_cost = std::numeric_limits<double>::infinity();
        int t = 0;
        while (t < config_.iterations) {
            const int batch = std::min(threads, config_.iterations - t);
            std::vector<IterationResult> results(static_cast<std::size_t>(batch));
            if (batch == 1) {
                results[0] = iterate(t, spaces[0], table_);
            } else {
                const ValueTable snapshot = table_;
                std::vector<std::thread> pool;
                for (int k = 0; k < batch; ++k)
                    pool.emplace_back([&, k] { results[k] = iterate(t + k, spaces[k], snapshot); });
                for (auto& th : pool) th.join();
            }
            for (int k = 0; k < batch; ++k) {
                auto& res = results[static_cast<std::size_t>(k)];
                if (res.aborted) {
                    ++report.aborted;
                } else {
                    if (use_table()) update_table(res);
                    if (res.cost < best_cost) {
                        best_cost = res.cost;
                        best = materialize(res);
                        report.best_iteration = t + k;
                    }
                }
                report.history.push_back({t + k, best_cost, ms_since(start), res.ms, res.aborted});
            }
            t += batch;
        }
        report.iterations = config_.iterations;
        report.elapsed_ms = ms_since(start);
        if (!best)
            throw UnexplainableLayoutError("every iteration reached a region that no split line can divide; "
                                           "the layout is not expressible as a split grammar");
        report.grammar = std::move(*best);
        report.best_cost = grammar_cost(report.grammar, config_.cost);
        report.rule_count = report.grammar.rules.size();
        report.value_table_size = table_.size();
        return report;
    }

private:
    bool use_table() const { return method_ == Method::adp; }

    void init_workspace(Workspace& ws) const {
        for (const auto& ctx : contexts_) {
            ws.regions.push_back(std::make_unique<RegionCache>(*ctx.grid));
            ws.candidates.emplace_back();
        }
    }

    const CandidateSet& candidates_for(Workspace& ws, int li, const RegionInfo& info) const {
        auto& cache = ws.candidates[static_cast<std::size_t>(li)];
        auto it = cache.find(info.sig);
        if (it != cache.end()) return it->second;
        auto& regions = *ws.regions[static_cast<std::size_t>(li)];
        CandidateSet set;
        set.rules = enumerate_candidates(regions, info.region, *contexts_[li].index, config_.cost, config_.heuristic,
                                         config_.ops);
        const Layout& layout = *contexts_[li].layout;
        const Rect origin = info.region.rect;
        for (const auto& c : set.rules) {
            std::vector<ChildInfo> kids;
            kids.reserve(c.children.size());
            for (const auto& ch : c.children) {
                const auto& ci = regions.get(ch.translated(origin.x, origin.y));
                ChildInfo k{ci.sig, -1};
                if (ci.region.size() == 1) k.label = layout.terminals[ci.region.terminal_ids.front()].label;
                kids.push_back(k);
            }
            set.children.push_back(std::move(kids));
        }
        return cache.emplace(info.sig, std::move(set)).first->second;
    }

    static bool crosses(const CandidateRule& c, const Rect& region, const std::vector<Rect>& protect) {
        for (const auto& p : protect) {
            if (p == region || !region.contains(p)) continue;
            for (const auto& line : c.lines) {
                const Length at = region.lo(line.axis) + line.coordinate;
                if (p.lo(line.axis) < at && at < p.hi(line.axis)) return true;
            }
        }
        return false;
    }

    // Eq. 4 style choice: rule cost plus the best known values of the distinct
    // compound children. Children already ruled in this iteration are free.
    static std::optional<std::size_t> exploit(const CandidateSet& set, const std::vector<std::size_t>& allowed,
                                              const ValueTable& table, const IterationResult& res) {
        std::optional<std::size_t> best;
        double best_q = std::numeric_limits<double>::infinity();
        std::vector<Signature> seen;
        for (std::size_t i : allowed) {
            double q = set.rules[i].rule_cost;
            bool known = true;
            seen.clear();
            for (const auto& k : set.children[i]) {
                if (k.label >= 0) continue;
                if (std::find(seen.begin(), seen.end(), k.sig) != seen.end()) continue;
                seen.push_back(k.sig);
                if (res.choices.count(k.sig)) continue;
                const auto* e = table.find(k.sig);
                if (!e) {
                    known = false;
                    break;
                }
                q += e->value;
            }
            if (known && q < best_q) {
                best_q = q;
                best = i;
            }
        }
        return best;
    }

    IterationResult iterate(int t, Workspace& ws, const ValueTable& table) const {
        const auto start = Clock::now();
        IterationResult res;
        std::mt19937_64 rng(iteration_seed(config_.seed, t));
        const double eps = method_ == Method::adp ? config_.epsilon(t) : 1.0;

        std::vector<std::vector<Rect>> protect(contexts_.size());
        if (config_.protect_regions && method_ == Method::adp) {
            for (std::size_t li = 0; li < contexts_.size(); ++li)
                for (const auto& r : select_protected_regions(*contexts_[li].index, rng)) protect[li].push_back(r.rect);
        }

        std::priority_queue<FrontierItem, std::vector<FrontierItem>, std::greater<>> frontier;
        for (std::size_t li = 0; li < contexts_.size(); ++li) {
            const Layout& layout = *contexts_[li].layout;
            const auto& info = ws.regions[li]->get(layout.domain());
            RootInfo root{info.sig, -1, layout.height};
            if (info.region.size() == 1) root.label = layout.terminals[info.region.terminal_ids.front()].label;
            res.roots.push_back(root);
            if (root.label < 0) frontier.push({static_cast<int>(li), layout.domain()});
        }

        double cost = 0.0;
        for (std::size_t i = 0; i < res.roots.size(); ++i) {
            const auto& root = res.roots[i];
            const auto earlier = res.roots.begin() + static_cast<std::ptrdiff_t>(i);
            if (root.label >= 0 && std::none_of(res.roots.begin(), earlier, [&](const RootInfo& r) { return r.sig == root.sig; }))
                cost += config_.cost.rule_cost(OpKind::split, 1);
        }

        std::vector<std::size_t> allowed;
        while (!frontier.empty()) {
            const FrontierItem item = frontier.top();
            frontier.pop();
            const auto& info = ws.regions[static_cast<std::size_t>(item.layout)]->get(item.rect);
            if (res.choices.count(info.sig)) continue;
            const CandidateSet& set = candidates_for(ws, item.layout, info);
            if (set.rules.empty()) {
                res.aborted = true;
                res.ms = ms_since(start);
                return res;
            }
            allowed.clear();
            const auto& prot = protect[static_cast<std::size_t>(item.layout)];
            for (std::size_t i = 0; i < set.rules.size(); ++i)
                if (prot.empty() || !crosses(set.rules[i], item.rect, prot)) allowed.push_back(i);
            if (allowed.empty())
                for (std::size_t i = 0; i < set.rules.size(); ++i) allowed.push_back(i);

            std::size_t pick = allowed.front();
            if (method_ != Method::greedy) {
                std::optional<std::size_t> chosen;
                const bool explore = unit_uniform(rng) < eps;
                if (!explore && use_table()) chosen = exploit(set, allowed, table, res);
                if (!chosen) {
                    std::vector<CandidateRule> pool;
                    if (allowed.size() == set.rules.size()) {
                        chosen = sample_candidate(set.rules, rng);
                    } else {
                        pool.reserve(allowed.size());
                        for (auto i : allowed) pool.push_back(set.rules[i]);
                        chosen = allowed[sample_candidate(pool, rng)];
                    }
                }
                pick = *chosen;
            }
            res.choices.emplace(info.sig, Choice{&set, pick, item.layout, item.rect});
            res.order.push_back(info.sig);
            cost += set.rules[pick].rule_cost;
            const auto& cand = set.rules[pick];
            for (std::size_t c = 0; c < cand.children.size(); ++c) {
                const auto& k = set.children[pick][c];
                if (k.label >= 0 || res.choices.count(k.sig)) continue;
                frontier.push({item.layout, cand.children[c].translated(item.rect.x, item.rect.y)});
            }
        }
        res.cost = cost;
        res.ms = ms_since(start);
        return res;
    }

    void update_table(const IterationResult& res) {
        std::unordered_map<Signature, double, SignatureHash> value;
        // Children are strictly smaller than their parent, so the recursion terminates.
        auto visit = [&](auto&& self, const Signature& sig) -> double {
            if (auto it = value.find(sig); it != value.end()) return it->second;
            const Choice& ch = res.choices.at(sig);
            const auto& cand = ch.set->rules[ch.index];
            double v = cand.rule_cost;
            std::vector<Signature> seen;
            for (const auto& k : ch.set->children[ch.index]) {
                if (k.label >= 0) continue;
                if (std::find(seen.begin(), seen.end(), k.sig) != seen.end()) continue;
                seen.push_back(k.sig);
                v += self(self, k.sig);
            }
            value.emplace(sig, v);
            table_.offer(sig, v, cand);
            return v;
        };
        for (const auto& sig : res.order) visit(visit, sig);
    }

    Grammar materialize(const IterationResult& res) const {
        const Layout& first = *contexts_.front().layout;
        Grammar g;
        g.materials = first.materials;
        if (contexts_.size() == 1) g.source_size = std::make_pair(first.width, first.height);

        std::unordered_map<Signature, std::string, SignatureHash> names;
        std::deque<Signature> queue;
        int next = 1;
        auto name_of = [&](const Signature& sig) -> const std::string& {
            auto it = names.find(sig);
            if (it != names.end()) return it->second;
            queue.push_back(sig);
            return names.emplace(sig, "NT" + std::to_string(next++)).first->second;
        };

        std::unordered_map<Signature, bool, SignatureHash> wrapped;
        for (const auto& root : res.roots) {
            const std::string name = name_of(root.sig);
            g.starts.push_back(name);
            if (root.label >= 0 && !wrapped[root.sig]) {
                wrapped[root.sig] = true;
                queue.erase(std::remove(queue.begin(), queue.end(), root.sig), queue.end());
                Rule r;
                r.lhs = name;
                r.op = OpKind::split;
                r.axis = Axis::y;
                r.successors.push_back({SizeSpec::absolute(root.height), g.materials[static_cast<std::size_t>(root.label)]});
                g.rules.push_back(std::move(r));
            }
        }
        while (!queue.empty()) {
            const Signature sig = queue.front();
            queue.pop_front();
            const Choice& ch = res.choices.at(sig);
            const auto& kids = ch.set->children[ch.index];
            std::vector<std::string> symbols;
            symbols.reserve(kids.size());
            for (const auto& k : kids)
                symbols.push_back(k.label >= 0 ? g.materials[static_cast<std::size_t>(k.label)] : name_of(k.sig));
            g.rules.push_back(to_rule(ch.set->rules[ch.index], names.at(sig), symbols));
        }
        return g;
    }

    SearchConfig config_;
    Method method_;
    std::vector<LayoutContext> contexts_;
    ValueTable table_;
};

}  // namespace

std::vector<Region> select_protected_regions(const SymmetryIndex& index, std::mt19937_64& rng) {
    // Weighted sampling without replacement: sort by u^(1/w) descending.
    std::vector<std::pair<double, const Region*>> keyed;
    for (const auto* set : index.sorted_sets()) {
        const double w = importance_score(*set) + 1.0;
        for (const auto& inst : set->instances) {
            const double u = std::max(unit_uniform(rng), 0x1.0p-60);
            keyed.emplace_back(std::log(u) / w, &inst);
        }
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Region> kept;
    for (const auto& [key, region] : keyed) {
        const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Region& k) { return k.rect.overlaps(region->rect); });
        if (!clash) kept.push_back(*region);
    }
    return kept;
}

SearchReport infer(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config) {
    return Search({&layout, 1}, &index, config, Method::adp).run();
}

SearchReport infer(const Layout& layout, const SearchConfig& config) {
    return Search({&layout, 1}, nullptr, config, Method::adp).run();
}

SearchReport infer_greedy(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config) {
    return Search({&layout, 1}, &index, config, Method::greedy).run();
}

SearchReport infer_greedy(const Layout& layout, const SearchConfig& config) {
    return Search({&layout, 1}, nullptr, config, Method::greedy).run();
}

SearchReport infer_importance_sampling(const Layout& layout, const SymmetryIndex& index, const SearchConfig& config) {
    return Search({&layout, 1}, &index, config, Method::importance_sampling).run();
}

SearchReport infer_importance_sampling(const Layout& layout, const SearchConfig& config) {
    return Search({&layout, 1}, nullptr, config, Method::importance_sampling).run();
}

SearchReport infer_with(Method method, const Layout& layout, const SearchConfig& config) {
    return Search({&layout, 1}, nullptr, config, method).run();
}

SearchReport infer_joint(std::span<const Layout> layouts, const SearchConfig& config, Method method) {
    if (layouts.empty()) throw ValidationError("joint extraction needs at least one layout");
    return Search(layouts, nullptr, config, method).run();
}

std::string report_to_json(const SearchReport& report) {
    nlohmann::ordered_json j;
    j["method"] = to_string(report.method);
    j["best_cost"] = report.best_cost;
    j["rule_count"] = report.rule_count;
    j["best_iteration"] = report.best_iteration;
    j["iterations"] = report.iterations;
    j["aborted"] = report.aborted;
    j["elapsed_ms"] = report.elapsed_ms;
    j["value_table_size"] = report.value_table_size;
    j["grammar"] = grammar_to_text(report.grammar);
    return j.dump(2) + "\n";
}

std::string history_to_csv(const SearchReport& report) {
    std::string out = "iteration,best_cost,elapsed_ms\n";
    for (const auto& h : report.history) {
        out += std::to_string(h.iteration) + ",";
        out += std::isfinite(h.best_cost) ? format_number(h.best_cost) : std::string("inf");
        out += "," + format_number(h.elapsed_ms) + "\n";
    }
    return out;
}

}  // namespace facadegram
