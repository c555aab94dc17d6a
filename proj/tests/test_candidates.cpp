#include <doctest.h>

#include "facadegram/candidates.hpp"
#include "support.hpp"

using namespace facadegram;

namespace {

struct Fixture {
    Layout layout;
    LayoutGrid grid;
    SymmetryIndex index;
    explicit Fixture(Layout l) : layout(std::move(l)), grid(layout), index(build_symmetry_index(grid)) {}
    std::vector<CandidateRule> all(OpSet ops = OpSet::all(), std::size_t cap = 100000) const {
        HeuristicConfig cfg;
        cfg.max_candidates = cap;
        return enumerate_candidates(grid, grid.whole(), index, CostModel{}, cfg, ops);
    }
};

const CandidateRule* find_op(const std::vector<CandidateRule>& cs, OpKind op, std::size_t listed) {
    for (const auto& c : cs)
        if (c.op == op && c.listed == listed) return &c;
    return nullptr;
}

// Flattened view of the index for the oracle.
std::vector<std::pair<Signature, std::vector<Region>>> index_sets(const SymmetryIndex& index) {
    std::vector<std::pair<Signature, std::vector<Region>>> out;
    for (const auto* s : index.sorted_sets()) out.push_back({s->sig, s->instances});
    return out;
}

// Heuristic recomputed from the children alone: interior child edges are the
// lines, and each instance strictly crossed by a line costs its share.
double reference_heuristic(const CandidateRule& c, const Layout& l, const Region& region, const SymmetryIndex& index,
                           const CostModel& cost, double l1, double l2) {
    (void)l;
    std::set<std::pair<int, Length>> lines;
    for (const auto& ch : c.children) {
        if (ch.x > 0) lines.insert({0, ch.x});
        if (ch.y > 0) lines.insert({1, ch.y});
    }
    double cut = 0.0;
    for (const auto& [axis, coord] : lines)
        for (const auto& [sig, set] : index_sets(index))
            for (const auto& inst : set) {
                if (!region.rect.contains(inst.rect)) continue;
                const Length lo = axis == 0 ? inst.rect.x - region.rect.x : inst.rect.y - region.rect.y;
                const Length hi = lo + (axis == 0 ? inst.rect.w : inst.rect.h);
                if (lo < coord && coord < hi) cut += double(inst.size()) / double(region.size());
            }
    const double rule = cost.cost_of(c.op) + double(c.listed);
    return l1 * rule + l2 * cut;
}

}  // namespace

TEST_CASE("valid split lines follow terminal boundaries") {
    const Layout l = testing::strip({{100, 1}, {200, 2}, {100, 1}});
    const LayoutGrid grid(l);
    const auto xs = valid_split_lines(l, grid.whole(), Axis::x);
    CHECK(xs == std::vector<SplitLine>{{Axis::x, 100}, {Axis::x, 300}});
    CHECK(valid_split_lines(l, grid.whole(), Axis::y).empty());

    // Pinwheel: no line crosses cleanly on either axis.
    Layout p;
    p.materials = {"transparent", "A", "B"};
    p.width = 3;
    p.height = 3;
    p.terminals = {{0, 0, 2, 1, 1}, {2, 0, 1, 2, 2}, {1, 2, 2, 1, 1}, {0, 1, 1, 2, 2}, {1, 1, 1, 1, 1}};
    REQUIRE(validate_layout(p).empty());
    const Fixture f(p);
    CHECK(valid_split_lines(p, f.grid.whole()).empty());
    CHECK(f.all().empty());
}

TEST_CASE("cut cost counts the terminals of cut instances") {
    const Region region{{0, 0, 100, 100}, std::vector<int>(20)};
    // One instance of A (3 terminals) and one of B (2 terminals) crossed by x = 50.
    std::vector<InstanceRef> inside{{{40, 0, 20, 30}, 3}, {{45, 60, 10, 10}, 2}, {{0, 0, 50, 10}, 4}};
    CHECK(cut_cost({Axis::x, 50}, region, inside) == doctest::Approx(5.0 / 20.0));
    // Three instances of C (4 terminals each) crossed by y = 50.
    std::vector<InstanceRef> cs{{{0, 40, 10, 20}, 4}, {{20, 40, 10, 20}, 4}, {{40, 40, 10, 20}, 4}, {{60, 50, 10, 20}, 4}};
    CHECK(cut_cost({Axis::y, 50}, region, cs) == doctest::Approx(12.0 / 20.0));
    CHECK(cut_cost({Axis::y, 90}, region, cs) == 0.0);
}

TEST_CASE("cut cost is zero without repeated regions") {
    const Layout l = testing::corpus_layout("random_1");
    const LayoutGrid grid(l);
    const SymmetryIndex empty;
    for (const auto& line : valid_split_lines(l, grid.whole())) CHECK(cut_cost(line, grid.whole(), empty) == 0.0);
    const auto cs = enumerate_candidates(grid, grid.whole(), empty, CostModel{}, HeuristicConfig{});
    for (const auto& c : cs) CHECK(c.cut_cost == 0.0);
}

TEST_CASE("split with three listed successors and no cut costs 3.1") {
    const Fixture f(testing::strip({{1000, 1}, {2000, 2}, {1000, 1}}));
    const auto cs = f.all();
    const auto* split = find_op(cs, OpKind::split, 3);
    REQUIRE(split);
    CHECK(split->heuristic == doctest::Approx(3.1).epsilon(1e-12));
    HeuristicConfig no_cut;
    no_cut.lambda2 = 0.0;
    for (const auto& c : cs) CHECK(heuristic(c, CostModel{}, no_cut) == doctest::Approx(c.rule_cost));
}

TEST_CASE("rows offer the compact operators") {
    const Fixture abab(testing::corpus_layout("row_abab"));
    const auto c1 = abab.all();
    const auto* rep = find_op(c1, OpKind::repeat, 2);
    REQUIRE(rep);
    CHECK(rep->children.size() == 4);
    CHECK(rep->rule_cost == doctest::Approx(2.5));

    const Fixture ababa(testing::corpus_layout("row_ababa"));
    const auto c2 = ababa.all();
    CHECK(std::any_of(c2.begin(), c2.end(), [](const CandidateRule& c) {
        return c.op == OpKind::repeat_aba && c.listed == 2 && c.children.size() == 5 && c.slots == std::vector<int>{0, 1, 0, 1, 0};
    }));

    const Fixture www(testing::strip({{1000, 1}, {500, 2}, {1000, 1}}, 1000, {"transparent", "Window1", "Wall1"}));
    const auto c3 = www.all();
    const auto* sym = find_op(c3, OpKind::symsplit, 2);
    REQUIRE(sym);
    CHECK(sym->children.size() == 3);
    CHECK(sym->slots == std::vector<int>{0, 1, 0});

    const Fixture grid(testing::corpus_layout("grid_checker_4x4"));
    CHECK(find_op(grid.all(), OpKind::gridsplit, 16) != nullptr);
}

TEST_CASE("heuristic matches a second implementation on every corpus region") {
    const CostModel cost;
    for (const auto& [name, l] : testing::corpus()) {
        CAPTURE(name);
        const Fixture f(l);
        RegionCache cache(f.grid);
        // The whole layout and every repeated instance with two or more terminals.
        std::vector<Region> regions{f.grid.whole()};
        for (const auto* s : f.index.sorted_sets())
            if (s->terminal_count() >= 2) regions.push_back(s->instances.front());
        for (const auto& region : regions) {
            HeuristicConfig cfg;
            cfg.max_candidates = 100000;
            for (const auto& c : enumerate_candidates(cache, region, f.index, cost, cfg)) {
                const double ref = reference_heuristic(c, l, region, f.index, cost, 1.0, 1.0);
                CHECK(c.heuristic == doctest::Approx(ref).epsilon(1e-12));
                HeuristicConfig w;
                w.lambda1 = 0.3;
                w.lambda2 = 2.5;
                CHECK(heuristic(c, cost, w) ==
                      doctest::Approx(reference_heuristic(c, l, region, f.index, cost, 0.3, 2.5)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("candidates tile their region with tiled children") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 60; ++trial) {
        const Fixture f(testing::random_tiling(rng, 30, 2));
        const Region whole = f.grid.whole();
        if (whole.size() < 2) continue;
        const auto cs = enumerate_candidates(f.grid, whole, f.index, CostModel{}, HeuristicConfig{});
        CHECK(cs.size() <= 64);
        CHECK(std::is_sorted(cs.begin(), cs.end(), candidate_less));
        for (const auto& c : cs) {
            Length area = 0;
            for (const auto& ch : c.children) {
                CHECK(Rect{0, 0, whole.rect.w, whole.rect.h}.contains(ch));
                CHECK(f.grid.is_tiled(ch));
                area += ch.area();
            }
            CHECK(area == whole.rect.area());
            CHECK(c.slots.size() == c.children.size());
            CHECK(c.rule_cost == doctest::Approx(CostModel{}.rule_cost(c.op, c.listed)));
        }
    }
}

TEST_CASE("disabling an operator removes exactly its candidates") {
    for (const auto& name : {"facade_classic", "row_ababa", "grid_checker_4x4", "facade_palindrome", "random_2"}) {
        CAPTURE(name);
        const Fixture f(testing::corpus_layout(name));
        const auto all = f.all();
        for (OpKind op : kAllOps) {
            OpSet ops = OpSet::all();
            ops.erase(op);
            const auto some = f.all(ops);
            std::vector<CandidateRule> expected;
            for (const auto& c : all)
                if (c.op != op) expected.push_back(c);
            REQUIRE(some.size() == expected.size());
            for (std::size_t i = 0; i < some.size(); ++i) {
                CHECK(some[i].op == expected[i].op);
                CHECK(some[i].cuts == expected[i].cuts);
                CHECK(some[i].row_cuts == expected[i].row_cuts);
                CHECK(some[i].listed == expected[i].listed);
            }
        }
    }
}

TEST_CASE("selection probabilities") {
    const std::vector<double> eq{1.0, 1.0};
    CHECK(selection_probabilities(eq) == std::vector<double>{0.5, 0.5});
    const std::vector<double> h{0.0, std::log(3.0)};
    const auto p = selection_probabilities(h);
    CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> hs(1 + trial % 9);
        for (auto& v : hs) v = u(rng);
        const auto a = selection_probabilities(hs);
        double s = 0.0;
        for (double v : a) s += v;
        CHECK(std::abs(s - 1.0) <= 1e-12);
        auto shifted = hs;
        for (auto& v : shifted) v += 123.0;
        const auto b = selection_probabilities(shifted);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("sampling frequencies follow the softmax") {
    const std::vector<std::vector<double>> vectors{
        {0.0, 0.0}, {0.0, std::log(3.0)}, {2.1, 2.5, 3.1, 3.5}, {1.0, 1.2, 1.4, 1.6, 4.0, 6.0}, {5.0, 5.0, 5.5}};
    std::mt19937_64 rng(42);
    const int draws = 100000;
    for (const auto& hs : vectors) {
        std::vector<CandidateRule> cs(hs.size());
        for (std::size_t i = 0; i < hs.size(); ++i) cs[i].heuristic = hs[i];
        // Oracle: direct evaluation of exp(-H) / sum exp(-H).
        double z = 0.0;
        for (double h : hs) z += std::exp(-h);
        std::vector<int> counts(hs.size());
        for (int i = 0; i < draws; ++i) ++counts[sample_candidate(cs, rng)];
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const double p = std::exp(-hs[i]) / z;
            const double sigma = std::sqrt(p * (1 - p) / draws);
            CHECK(std::abs(double(counts[i]) / draws - p) <= 3 * sigma);
        }
    }
}
