#include <doctest.h>

#include <Eigen/Dense>

#include "facadegram/errors.hpp"
#include "facadegram/region.hpp"
#include "facadegram/regularize.hpp"
#include "support.hpp"

using namespace facadegram;
using testing::strip;

namespace {

bool has_kind(const std::vector<Violation>& v, ViolationKind k) {
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.kind == k; });
}

// Dense KKT solve over raw (x, y, w, h) per terminal. Returns nullopt when the
// constraints are inconsistent.
struct KktResult {
    Eigen::VectorXd v;
    double objective;
};

std::optional<KktResult> kkt_fit(const Layout& l, const SizeGroups& groups) {
    const int n = static_cast<int>(l.terminals.size());
    const int nv = 4 * n;
    auto X = [](int i) { return 4 * i; };
    auto Y = [](int i) { return 4 * i + 1; };
    auto W = [](int i) { return 4 * i + 2; };
    auto H = [](int i) { return 4 * i + 3; };
    std::vector<std::pair<std::vector<std::pair<int, double>>, double>> rows;
    auto eq = [&](std::vector<std::pair<int, double>> terms, double rhs) { rows.push_back({std::move(terms), rhs}); };
    for (int i = 0; i < n; ++i) {
        const auto& t = l.terminals[i];
        if (t.x == 0) eq({{X(i), 1}}, 0);
        if (t.y == 0) eq({{Y(i), 1}}, 0);
        if (t.x + t.w == l.width) eq({{X(i), 1}, {W(i), 1}}, double(l.width));
        if (t.y + t.h == l.height) eq({{Y(i), 1}, {H(i), 1}}, double(l.height));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& a = l.terminals[i];
            const auto& b = l.terminals[j];
            const bool y_overlap = a.y < b.y + b.h && b.y < a.y + a.h;
            const bool x_overlap = a.x < b.x + b.w && b.x < a.x + a.w;
            if (a.x + a.w == b.x && y_overlap) {
                eq({{X(i), 1}, {W(i), 1}, {X(j), -1}}, 0);
                if (a.y == b.y) eq({{Y(i), 1}, {Y(j), -1}}, 0);
                if (a.y + a.h == b.y + b.h) eq({{Y(i), 1}, {H(i), 1}, {Y(j), -1}, {H(j), -1}}, 0);
            }
            if (a.y + a.h == b.y && x_overlap) {
                eq({{Y(i), 1}, {H(i), 1}, {Y(j), -1}}, 0);
                if (a.x == b.x) eq({{X(i), 1}, {X(j), -1}}, 0);
                if (a.x + a.w == b.x + b.w) eq({{X(i), 1}, {W(i), 1}, {X(j), -1}, {W(j), -1}}, 0);
            }
        }
    for (const auto& g : groups)
        for (std::size_t k = 1; k < g.size(); ++k) {
            eq({{W(g[0]), 1}, {W(g[k]), -1}}, 0);
            eq({{H(g[0]), 1}, {H(g[k]), -1}}, 0);
        }
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv + m, nv + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + m);
    Eigen::VectorXd v0(nv);
    for (int i = 0; i < n; ++i) {
        const auto& t = l.terminals[i];
        v0(X(i)) = double(t.x);
        v0(Y(i)) = double(t.y);
        v0(W(i)) = double(t.w);
        v0(H(i)) = double(t.h);
    }
    K.topLeftCorner(nv, nv) = 2.0 * Eigen::MatrixXd::Identity(nv, nv);
    rhs.head(nv) = 2.0 * v0;
    for (int r = 0; r < m; ++r) {
        for (const auto& [c, a] : rows[r].first) {
            K(nv + r, c) += a;
            K(c, nv + r) += a;
        }
        rhs(nv + r) = rows[r].second;
    }
    const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    if ((K * sol - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) return std::nullopt;
    const Eigen::VectorXd v = sol.head(nv);
    return KktResult{v, (v - v0).squaredNorm()};
}

}  // namespace

TEST_CASE("validation reports each violation kind") {
    Layout ok = strip({{100, 1}, {200, 2}});
    CHECK(validate_layout(ok).empty());

    Layout overlap = ok;
    overlap.terminals[1].x = 50;
    overlap.terminals[1].w = 250;
    CHECK(has_kind(validate_layout(overlap), ViolationKind::overlap));

    Layout gap = ok;
    gap.terminals[1].x = 150;
    gap.terminals[1].w = 150;
    CHECK(has_kind(validate_layout(gap), ViolationKind::gap));

    Layout out = ok;
    out.terminals[1].w = 400;
    CHECK(has_kind(validate_layout(out), ViolationKind::out_of_bounds));

    Layout bad = ok;
    bad.terminals[0].label = 0;
    CHECK(has_kind(validate_layout(bad), ViolationKind::bad_label));
    bad.terminals[0].label = 9;
    CHECK(has_kind(validate_layout(bad), ViolationKind::bad_label));
    CHECK_THROWS_AS(require_valid(bad), ValidationError);
}

TEST_CASE("layout text round trip and canonical order") {
    for (const auto& [name, l] : testing::corpus()) {
        CAPTURE(name);
        CHECK(validate_layout(l).empty());
        const Layout back = layout_from_string(layout_to_string(l));
        CHECK(back == l);
        Layout shuffled = l;
        std::reverse(shuffled.terminals.begin(), shuffled.terminals.end());
        CHECK(same_layout(shuffled, l));
        CHECK(canonicalize(shuffled) == canonicalize(l));
    }
    CHECK_THROWS_AS(layout_from_string("{\"width\": 10"), ParseError);
}

TEST_CASE("signatures are translation invariant and content sensitive") {
    const Layout l = strip({{100, 1}, {200, 2}, {100, 1}, {200, 2}, {100, 2}});
    const LayoutGrid grid(l);
    const auto a = grid.region({0, 0, 300, 1000});
    const auto b = grid.region({300, 0, 300, 1000});
    const auto c = grid.region({600, 0, 100, 1000});
    CHECK(signature(l, a) == signature(l, b));
    CHECK(same_content(l, a, l, b));
    CHECK(signature(l, grid.region({0, 0, 100, 1000})) != signature(l, c));
    CHECK_FALSE(grid.is_tiled({50, 0, 100, 1000}));
    CHECK(grid.is_tiled({100, 0, 300, 1000}));
    CHECK(grid.terminals_in({100, 0, 300, 1000}) == std::vector<int>{1, 2});
}

TEST_CASE("regularization matches a dense KKT solve") {
    std::mt19937_64 rng(7);
    int compared = 0, infeasible = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const Layout l = testing::random_tiling(rng, 14, 2);
        SizeGroups groups = default_size_groups(l);
        if (trial % 2 == 1) {
            // One random pair instead of whole label classes.
            std::uniform_int_distribution<int> pick(0, int(l.terminals.size()) - 1);
            const int a = pick(rng), b = pick(rng);
            groups = a == b ? SizeGroups{} : SizeGroups{{a, b}};
        }
        const auto oracle = kkt_fit(l, groups);
        if (!oracle) {
            CHECK_THROWS_AS(regularize(l, groups), InfeasibleError);
            ++infeasible;
            continue;
        }
        const FitSolution fit = solve_fit(l, groups);
        for (std::size_t i = 0; i < l.terminals.size(); ++i) {
            CHECK(fit.x[i] == doctest::Approx(oracle->v(4 * i)).epsilon(1e-7));
            CHECK(fit.y[i] == doctest::Approx(oracle->v(4 * i + 1)).epsilon(1e-7));
            CHECK(fit.w[i] == doctest::Approx(oracle->v(4 * i + 2)).epsilon(1e-7));
            CHECK(fit.h[i] == doctest::Approx(oracle->v(4 * i + 3)).epsilon(1e-7));
        }
        CHECK(fit.objective == doctest::Approx(oracle->objective).epsilon(1e-7));
        ++compared;
    }
    MESSAGE("compared " << compared << ", infeasible " << infeasible);
    CHECK(compared >= 30);
}

TEST_CASE("regularization output is a valid grouped tiling and idempotent") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const Layout l = testing::random_tiling(rng, 16, 3);
        const auto groups = default_size_groups(l);
        if (!kkt_fit(l, groups)) continue;
        Layout r;
        try {
            r = regularize(l, groups);
        } catch (const InfeasibleError&) {
            continue;  // the fit collapsed a terminal
        }
        CHECK(validate_layout(r).empty());
        for (const auto& g : groups)
            for (int id : g) {
                CHECK(r.terminals[id].w == r.terminals[g[0]].w);
                CHECK(r.terminals[id].h == r.terminals[g[0]].h);
            }
        CHECK(regularize(r, groups) == r);
    }
}

TEST_CASE("two grouped windows of 10 and 12 both become 11") {
    const Layout l = strip({{5, 1}, {10, 2}, {5, 1}, {12, 2}, {8, 1}}, 20);
    const SizeGroups groups{{1, 3}};
    const Layout r = regularize(l, groups);
    CHECK(r.terminals[1].w == 11);
    CHECK(r.terminals[3].w == 11);
    CHECK(validate_layout(r).empty());
}

TEST_CASE("regularization beats a grid search over the three free lines") {
    // Lines a, b, c free; the fourth follows from the equal window widths.
    const Layout l = strip({{5, 1}, {10, 2}, {5, 1}, {12, 2}, {8, 1}}, 20);
    const SizeGroups groups{{1, 3}};
    const FitSolution fit = solve_fit(l, groups);
    CHECK(fit.free_variables == 3);
    auto objective = [&](double a, double b, double c) {
        const double d = c + (b - a);
        const double xs[] = {0, a, b, c, d, 40};
        double s = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto& t = l.terminals[i];
            s += std::pow(xs[i] - double(t.x), 2) + std::pow(xs[i + 1] - xs[i] - double(t.w), 2);
        }
        return s;
    };
    double best = std::numeric_limits<double>::infinity();
    for (double a = 0; a <= 12; a += 0.05)
        for (double b = a + 0.5; b <= 22; b += 0.05)
            for (double c = b; c <= 30; c += 0.05) {
                if (c + (b - a) >= 40) break;
                best = std::min(best, objective(a, b, c));
            }
    CHECK(fit.objective <= best + 1e-9);
    CHECK(best - fit.objective < 0.05);
}

TEST_CASE("contradictory groups are infeasible") {
    // Two grouped slabs that must fill different spans.
    Layout l;
    l.materials = {"transparent", "A", "B"};
    l.width = 300;
    l.height = 200;
    l.terminals = {{0, 0, 100, 100, 1}, {100, 0, 200, 100, 2}, {0, 100, 300, 100, 1}};
    CHECK_THROWS_AS(regularize(l, SizeGroups{{0, 2}}), InfeasibleError);
}
