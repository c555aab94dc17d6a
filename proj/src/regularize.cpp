#include "facadegram/regularize.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "facadegram/errors.hpp"

namespace facadegram {

SizeGroups default_size_groups(const Layout& layout) {
    std::map<Label, std::vector<int>> by_label;
    for (int i = 0; i < static_cast<int>(layout.terminals.size()); ++i)
        by_label[layout.terminals[i].label].push_back(i);
    SizeGroups groups;
    for (auto& [label, ids] : by_label)
        if (ids.size() >= 2) groups.push_back(std::move(ids));
    return groups;
}

double fit_objective(const Layout& input, const Layout& output) {
    double sum = 0.0;
    for (std::size_t i = 0; i < input.terminals.size(); ++i) {
        const auto& a = input.terminals[i];
        const auto& b = output.terminals[i];
        const double d[4] = {double(b.x - a.x), double(b.y - a.y), double(b.w - a.w), double(b.h - a.h)};
        for (double v : d) sum += v * v;
    }
    return sum;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

struct Constraint {
    std::vector<std::pair<std::size_t, double>> terms;
    double rhs = 0.0;
    std::string what;
};

// Edge-line parametrization of a layout plus its linear equality constraints.
struct LineSystem {
    // Per terminal: variable index of left, right, bottom, top edge line.
    std::vector<std::array<std::size_t, 4>> edges;
    std::size_t variables = 0;
    std::vector<Constraint> constraints;
};

enum Side { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

LineSystem build_system(const Layout& layout, const SizeGroups& groups) {
    const std::size_t n = layout.terminals.size();
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int id : groups[g])
            if (id < 0 || static_cast<std::size_t>(id) >= n)
                throw ValidationError("size group " + std::to_string(g) + " references unknown terminal " +
                                      std::to_string(id));

    // Edge ids 4*i + side; four sentinels for the domain border.
    const std::size_t x0 = 4 * n, xw = 4 * n + 1, y0 = 4 * n + 2, yh = 4 * n + 3;
    UnionFind uf(4 * n + 4);
    auto e = [](std::size_t i, Side s) { return 4 * i + s; };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = layout.terminals[i];
        if (t.x == 0) uf.unite(e(i, kLeft), x0);
        if (t.x + t.w == layout.width) uf.unite(e(i, kRight), xw);
        if (t.y == 0) uf.unite(e(i, kBottom), y0);
        if (t.y + t.h == layout.height) uf.unite(e(i, kTop), yh);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = layout.terminals[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& b = layout.terminals[j];
            const bool y_overlap = a.y < b.y + b.h && b.y < a.y + a.h;
            const bool x_overlap = a.x < b.x + b.w && b.x < a.x + a.w;
            // a immediately left of b
            if (a.x + a.w == b.x && y_overlap) uf.unite(e(i, kRight), e(j, kLeft));
            // a immediately below b
            if (a.y + a.h == b.y && x_overlap) {
                uf.unite(e(i, kTop), e(j, kBottom));
                if (a.x == b.x) uf.unite(e(i, kLeft), e(j, kLeft));
                if (a.x + a.w == b.x + b.w) uf.unite(e(i, kRight), e(j, kRight));
            }
            if (a.x + a.w == b.x && y_overlap) {
                if (a.y == b.y) uf.unite(e(i, kBottom), e(j, kBottom));
                if (a.y + a.h == b.y + b.h) uf.unite(e(i, kTop), e(j, kTop));
            }
        }
    }

    LineSystem sys;
    std::map<std::size_t, std::size_t> var_of_root;
    auto var = [&](std::size_t edge) {
        const std::size_t root = uf.find(edge);
        auto [it, inserted] = var_of_root.emplace(root, var_of_root.size());
        return it->second;
    };
    const std::size_t vx0 = var(x0), vxw = var(xw), vy0 = var(y0), vyh = var(yh);
    sys.edges.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int s = 0; s < 4; ++s) sys.edges[i][s] = var(e(i, static_cast<Side>(s)));
    sys.variables = var_of_root.size();

    sys.constraints.push_back({{{vx0, 1.0}}, 0.0, "left border fixed at 0"});
    sys.constraints.push_back({{{vxw, 1.0}}, double(layout.width), "right border fixed at width"});
    sys.constraints.push_back({{{vy0, 1.0}}, 0.0, "bottom border fixed at 0"});
    sys.constraints.push_back({{{vyh, 1.0}}, double(layout.height), "top border fixed at height"});
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& ids = groups[g];
        for (std::size_t k = 1; k < ids.size(); ++k) {
            const auto& a = sys.edges[ids[0]];
            const auto& b = sys.edges[ids[k]];
            const std::string tag = "group " + std::to_string(g) + ": terminal " + std::to_string(ids[k]) +
                                    " matches terminal " + std::to_string(ids[0]);
            sys.constraints.push_back(
                {{{a[kRight], 1.0}, {a[kLeft], -1.0}, {b[kRight], -1.0}, {b[kLeft], 1.0}}, 0.0, tag + " width"});
            sys.constraints.push_back(
                {{{a[kTop], 1.0}, {a[kBottom], -1.0}, {b[kTop], -1.0}, {b[kBottom], 1.0}}, 0.0, tag + " height"});
        }
    }
    return sys;
}

// Affine parametrization v = offset + basis * z of the feasible set.
struct Parametrization {
    Eigen::VectorXd offset;
    Eigen::MatrixXd basis;
};

Parametrization eliminate(const LineSystem& sys) {
    const std::size_t m = sys.variables;
    const std::size_t r = sys.constraints.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, m);
    Eigen::VectorXd rhs(r);
    // provenance(k, c) != 0 iff original constraint c contributed to row k
    Eigen::MatrixXd provenance = Eigen::MatrixXd::Identity(r, r);
    for (std::size_t k = 0; k < r; ++k) {
        for (auto [v, c] : sys.constraints[k].terms) a(k, v) += c;
        rhs(k) = sys.constraints[k].rhs;
    }
    constexpr double eps = 1e-9;
    std::vector<std::ptrdiff_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m && row < r; ++col) {
        Eigen::Index best;
        const double mag = a.col(col).segment(row, r - row).cwiseAbs().maxCoeff(&best);
        if (mag < eps) continue;
        const Eigen::Index p = static_cast<Eigen::Index>(row) + best;
        a.row(p).swap(a.row(row));
        provenance.row(p).swap(provenance.row(row));
        std::swap(rhs(p), rhs(row));
        const double piv = a(row, col);
        a.row(row) /= piv;
        rhs(row) /= piv;
        for (std::size_t k = 0; k < r; ++k) {
            if (k == row) continue;
            const double f = a(k, col);
            if (std::abs(f) < eps) continue;
            a.row(k) -= f * a.row(row);
            rhs(k) -= f * rhs(row);
            provenance.row(k) += provenance.row(row).cwiseAbs();
        }
        pivot_col.push_back(static_cast<std::ptrdiff_t>(col));
        ++row;
    }
    for (std::size_t k = row; k < r; ++k) {
        if (std::abs(rhs(k)) > 1e-6) {
            std::string msg = "contradictory constraints:";
            for (std::size_t c = 0; c < r; ++c)
                if (provenance(k, c) != 0.0) msg += "\n  " + sys.constraints[c].what;
            throw InfeasibleError(msg);
        }
    }

    std::vector<bool> is_pivot(m, false);
    for (auto c : pivot_col) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < m; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);

    Parametrization p;
    p.offset = Eigen::VectorXd::Zero(m);
    p.basis = Eigen::MatrixXd::Zero(m, free_cols.size());
    for (std::size_t f = 0; f < free_cols.size(); ++f) p.basis(free_cols[f], f) = 1.0;
    for (std::size_t k = 0; k < pivot_col.size(); ++k) {
        const auto pc = pivot_col[k];
        p.offset(pc) = rhs(k);
        for (std::size_t f = 0; f < free_cols.size(); ++f) p.basis(pc, f) = -a(k, free_cols[f]);
    }
    return p;
}

struct Solved {
    LineSystem sys;
    Parametrization param;
    Eigen::VectorXd z;  // free coordinates of the optimum
};

Solved solve(const Layout& layout, const SizeGroups& groups) {
    Solved s{build_system(layout, groups), {}, {}};
    s.param = eliminate(s.sys);
    const std::size_t n = layout.terminals.size();
    const Eigen::Index f = s.param.basis.cols();
    // Residual rows: x = L, w = R - L, y = B, h = T - B.
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(4 * n, s.sys.variables);
    Eigen::VectorXd target(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = layout.terminals[i];
        const auto& ed = s.sys.edges[i];
        design(4 * i, ed[kLeft]) += 1.0;
        target(4 * i) = double(t.x);
        design(4 * i + 1, ed[kRight]) += 1.0;
        design(4 * i + 1, ed[kLeft]) -= 1.0;
        target(4 * i + 1) = double(t.w);
        design(4 * i + 2, ed[kBottom]) += 1.0;
        target(4 * i + 2) = double(t.y);
        design(4 * i + 3, ed[kTop]) += 1.0;
        design(4 * i + 3, ed[kBottom]) -= 1.0;
        target(4 * i + 3) = double(t.h);
    }
    if (f == 0) {
        s.z = Eigen::VectorXd(0);
        return s;
    }
    const Eigen::MatrixXd reduced = design * s.param.basis;
    const Eigen::VectorXd shifted = target - design * s.param.offset;
    s.z = (reduced.transpose() * reduced).ldlt().solve(reduced.transpose() * shifted);
    return s;
}

}  // namespace

FitSolution solve_fit(const Layout& layout, const SizeGroups& groups) {
    const Solved s = solve(layout, groups);
    const Eigen::VectorXd v = s.param.offset + s.param.basis * s.z;
    FitSolution out;
    out.variables = s.sys.variables;
    out.free_variables = static_cast<std::size_t>(s.param.basis.cols());
    for (std::size_t i = 0; i < layout.terminals.size(); ++i) {
        const auto& ed = s.sys.edges[i];
        const auto& t = layout.terminals[i];
        out.x.push_back(v(ed[kLeft]));
        out.w.push_back(v(ed[kRight]) - v(ed[kLeft]));
        out.y.push_back(v(ed[kBottom]));
        out.h.push_back(v(ed[kTop]) - v(ed[kBottom]));
        const double d[4] = {out.x.back() - t.x, out.y.back() - t.y, out.w.back() - t.w, out.h.back() - t.h};
        for (double dv : d) out.objective += dv * dv;
    }
    return out;
}

Layout regularize(const Layout& layout, const SizeGroups& groups) {
    require_valid(layout);
    const Solved s = solve(layout, groups);
    const Eigen::VectorXd z = s.z.array().round().matrix();
    const Eigen::VectorXd v = s.param.offset + s.param.basis * z;
    std::vector<Length> line(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) line[k] = static_cast<Length>(std::llround(v(k)));

    Layout out = layout;
    for (std::size_t i = 0; i < layout.terminals.size(); ++i) {
        const auto& ed = s.sys.edges[i];
        auto& t = out.terminals[i];
        t.x = line[ed[kLeft]];
        t.w = line[ed[kRight]] - t.x;
        t.y = line[ed[kBottom]];
        t.h = line[ed[kTop]] - t.y;
        if (t.w <= 0 || t.h <= 0)
            throw InfeasibleError("regularization collapses terminal " + std::to_string(i));
    }
    const auto violations = validate_layout(out);
    if (!violations.empty())
        throw InfeasibleError("regularization breaks the tiling: " + violations.front().message);
    return out;
}

}  // namespace facadegram
