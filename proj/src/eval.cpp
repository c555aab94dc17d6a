#include "facadegram/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "facadegram/errors.hpp"
#include "facadegram/grammar_io.hpp"

namespace facadegram {

std::set<Rect> nonterminal_regions(const Grammar& grammar, const Layout& layout) {
    const Derivation d = derive(grammar, layout.width, layout.height);
    if (!same_layout(d.layout, layout)) throw DerivationError("grammar does not derive the given layout");
    std::set<Rect> out;
    for (std::size_t i = 1; i < d.tree.nodes.size(); ++i)
        if (!d.tree.nodes[i].is_leaf()) out.insert(d.tree.nodes[i].rect);
    return out;
}

ComparisonResult score_regions(std::size_t common, std::size_t regions_a, std::size_t regions_b) {
    ComparisonResult r;
    r.common_regions = common;
    r.regions_a = regions_a;
    r.regions_b = regions_b;
    auto ratio = [](std::size_t num, std::size_t den, std::size_t other) {
        if (den == 0) return other == 0 ? 1.0 : 0.0;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(common, regions_a, regions_b);
    r.recall = ratio(common, regions_b, regions_a);
    const double s = r.precision + r.recall;
    r.f_score = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
    return r;
}

ComparisonResult compare(const Grammar& a, const Grammar& b, const Layout& layout) {
    const auto ra = nonterminal_regions(a, layout);
    const auto rb = nonterminal_regions(b, layout);
    std::size_t common = 0;
    for (const auto& r : ra) common += rb.count(r);
    return score_regions(common, ra.size(), rb.size());
}

namespace {

BenchmarkRow run_cell(const BenchmarkInput& in, Method method, const SearchConfig& config, int runs) {
    BenchmarkRow row;
    row.layout_id = in.id;
    row.method = method;
    row.runs = runs;
    try {
        const SymmetryIndex index = build_symmetry_index(LayoutGrid(in.layout));
        std::vector<double> cost, rules, time;
        for (int r = 0; r < runs; ++r) {
            SearchConfig c = config;
            c.seed = config.seed + static_cast<std::uint64_t>(r);
            const auto start = std::chrono::steady_clock::now();
            SearchReport rep;
            switch (method) {
                case Method::adp: rep = infer(in.layout, index, c); break;
                case Method::greedy: rep = infer_greedy(in.layout, index, c); break;
                case Method::importance_sampling: rep = infer_importance_sampling(in.layout, index, c); break;
            }
            time.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
            cost.push_back(rep.best_cost);
            rules.push_back(static_cast<double>(rep.rule_count));
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        row.cost_min = *std::min_element(cost.begin(), cost.end());
        row.cost_mean = mean(cost);
        row.rules_min = *std::min_element(rules.begin(), rules.end());
        row.rules_mean = mean(rules);
        row.time_ms_min = *std::min_element(time.begin(), time.end());
        row.time_ms_mean = mean(time);
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<BenchmarkRow> benchmark(std::span<const BenchmarkInput> layouts, std::span<const Method> methods,
                                    const SearchConfig& config, const BenchmarkOptions& options) {
    if (layouts.empty() || methods.empty()) throw ValidationError("benchmark needs at least one layout and one method");
    if (options.runs < 1) throw ValidationError("runs must be at least 1");
    const std::size_t cells = layouts.size() * methods.size();
    std::vector<BenchmarkRow> rows(cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells; i = next++)
            rows[i] = run_cell(layouts[i / methods.size()], methods[i % methods.size()], config, options.runs);
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(cells)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

std::string benchmark_to_csv(std::span<const BenchmarkRow> rows) {
    std::string out = "layout_id,method,runs,cost_min,cost_mean,rules_min,rules_mean,time_ms_min,time_ms_mean\n";
    for (const auto& r : rows) {
        out += r.layout_id + "," + to_string(r.method) + "," + std::to_string(r.runs);
        const double vals[] = {r.cost_min, r.cost_mean, r.rules_min, r.rules_mean, r.time_ms_min, r.time_ms_mean};
        for (double v : vals) out += "," + (r.failed ? std::string("failed") : format_number(v));
        out += "\n";
    }
    return out;
}

}  // namespace facadegram
