#include <doctest.h>

#include "facadegram/symmetry.hpp"
#include "support.hpp"

using namespace facadegram;

namespace {

// Index contents keyed like the oracle, so both sides compare directly.
std::map<std::string, std::vector<Rect>> index_sets(const Layout& l, const testing::BruteSymmetry& brute) {
    const LayoutGrid grid(l);
    const SymmetryIndex index = build_symmetry_index(grid);
    std::map<std::string, std::vector<Rect>> out;
    for (const auto* set : index.sorted_sets()) {
        std::vector<Rect> rects;
        for (const auto& r : set->instances) rects.push_back(r.rect);
        const auto key = brute.key(rects.front());
        REQUIRE(key);
        CHECK(out.count(*key) == 0);
        out[*key] = rects;
    }
    return out;
}

Layout make(Length w, Length h, std::vector<TerminalRect> ts, int labels = 3) {
    Layout l;
    l.width = w;
    l.height = h;
    l.materials = {"transparent"};
    for (int i = 1; i <= labels; ++i) l.materials.push_back("M" + std::to_string(i));
    l.terminals = std::move(ts);
    return l;
}

}  // namespace

TEST_CASE("single terminal gives an empty index") {
    const Layout l = testing::corpus_layout("single");
    CHECK(build_symmetry_index(LayoutGrid(l)).empty());
}

TEST_CASE("abab row has exactly the three expected sets") {
    const Layout l = testing::strip({{1, 1}, {1, 2}, {1, 1}, {1, 2}}, 1);
    const LayoutGrid grid(l);
    const SymmetryIndex index = build_symmetry_index(grid);
    std::set<std::vector<Rect>> got;
    for (const auto* s : index.sorted_sets()) {
        std::vector<Rect> rects;
        for (const auto& r : s->instances) rects.push_back(r.rect);
        got.insert(rects);
    }
    const std::set<std::vector<Rect>> want{{{0, 0, 1, 1}, {2, 0, 1, 1}},
                                           {{1, 0, 1, 1}, {3, 0, 1, 1}},
                                           {{0, 0, 2, 1}, {2, 0, 2, 1}}};
    CHECK(got == want);
}

TEST_CASE("uniform grid index holds every repeated block size") {
    for (int n = 1; n <= 4; ++n)
        for (int m = 1; m <= 4; ++m) {
            Layout l = make(n, m, {}, 1);
            for (int y = 0; y < m; ++y)
                for (int x = 0; x < n; ++x) l.terminals.push_back({x, y, 1, 1, 1});
            const SymmetryIndex index = build_symmetry_index(LayoutGrid(l));
            CHECK(index.size() == std::size_t(n * m - 1));
            for (const auto* s : index.sorted_sets()) {
                const auto& r = s->instances.front().rect;
                CHECK(s->occurrence_count() == std::size_t((n - r.w + 1) * (m - r.h + 1)));
            }
        }
}

TEST_CASE("growing absorbs an aligned column") {
    // A | B/C/D stacked | R
    const Layout l = make(3, 3, {{0, 0, 1, 3, 1}, {1, 0, 1, 1, 2}, {1, 1, 1, 1, 3}, {1, 2, 1, 1, 2}, {2, 0, 1, 3, 1}});
    const LayoutGrid grid(l);
    const auto g = grow_region(grid, grid.region({0, 0, 1, 3}), Direction::right);
    REQUIRE(g);
    CHECK(g->rect == Rect{0, 0, 2, 3});
    CHECK(g->terminal_ids.size() == 4);
    CHECK_FALSE(grow_region(grid, grid.region({2, 0, 1, 3}), Direction::right));
    CHECK_FALSE(grow_region(grid, grid.region({0, 0, 1, 3}), Direction::left));
}

TEST_CASE("growing is blocked by unaligned right borders") {
    const Layout l = make(4, 4,
                          {{0, 0, 1, 3, 1},
                           {1, 0, 2, 1, 2},
                           {1, 1, 1, 1, 3},
                           {2, 1, 1, 1, 2},
                           {1, 2, 1, 1, 3},
                           {2, 2, 1, 2, 1},
                           {3, 0, 1, 2, 2},
                           {3, 2, 1, 2, 3},
                           {0, 3, 2, 1, 2}});
    REQUIRE(validate_layout(l).empty());
    const LayoutGrid grid(l);
    CHECK_FALSE(grow_region(grid, grid.region({0, 0, 1, 3}), Direction::right));
}

TEST_CASE("index equals the brute-force closure on random layouts") {
    std::mt19937_64 rng(2024);
    std::size_t nonempty = 0, sets = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Layout l = testing::random_tiling(rng, 36, trial % 3 == 0 ? 3 : 2);
        CAPTURE(layout_to_string(l));
        const testing::BruteSymmetry brute(l);
        const auto want = brute.closure();
        const auto got = index_sets(l, brute);
        CHECK(got == want);
        if (!want.empty()) ++nonempty;
        sets += want.size();
    }
    MESSAGE("layouts with repeats: " << nonempty << ", sets compared: " << sets);
    CHECK(nonempty >= 180);
}

TEST_CASE("index is a fixed point of growing and closed under translation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Layout l = testing::random_tiling(rng, 30, 2);
        const LayoutGrid grid(l);
        const SymmetryIndex index = build_symmetry_index(grid);
        const testing::BruteSymmetry brute(l);
        for (const auto* s : index.sorted_sets()) {
            CHECK(s->occurrence_count() >= 2);
            const auto key = *brute.key(s->instances.front().rect);
            // Every tiled congruent copy is listed.
            CHECK(s->occurrence_count() == brute.all().at(key).size());
            for (const auto& inst : s->instances)
                for (Direction d : kDirections) {
                    const auto g = grow_region(grid, inst, d);
                    if (!g) continue;
                    if (find_occurrences(grid, *g).size() < 2) continue;
                    CHECK(index.find(signature(l, *g)) != nullptr);
                }
        }
    }
}

TEST_CASE("importance score") {
    RepeatedRegionSet s;
    s.instances.resize(3);
    s.instances[0].terminal_ids = {0, 1, 2, 3};
    CHECK(importance_score(s) == 6.0);
    s.instances.resize(2);
    s.instances[0].terminal_ids = {0, 1};
    CHECK(importance_score(s) == 1.0);
    s.instances[0].terminal_ids = {0};
    CHECK(importance_score(s) == 0.0);
}

TEST_CASE("index add, delete and query") {
    const Layout l = testing::corpus_layout("row_abab");
    SymmetryIndex index = build_symmetry_index(LayoutGrid(l));
    const std::size_t n = index.size();
    REQUIRE(n > 0);
    const auto first = *index.sorted_sets().front();
    CHECK(index.erase(first.sig));
    CHECK(index.size() == n - 1);
    CHECK(index.find(first.sig) == nullptr);
    CHECK_FALSE(index.erase(first.sig));
    index.insert(first);
    CHECK(index.size() == n);
    REQUIRE(index.find(first.sig) != nullptr);
    CHECK(index.find(first.sig)->instances == first.instances);
    CHECK_FALSE(index.dump().empty());
}
