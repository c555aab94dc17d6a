#include "facadegram/layout.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "facadegram/errors.hpp"

namespace facadegram {

using json = nlohmann::ordered_json;

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::overlap: return "overlap";
        case ViolationKind::gap: return "gap";
        case ViolationKind::out_of_bounds: return "out-of-bounds";
        case ViolationKind::bad_label: return "bad-label";
    }
    return "?";
}

namespace {

std::vector<Violation> find_gaps(const Layout& layout, const std::vector<int>& in_bounds) {
    std::vector<Length> xs{0, layout.width}, ys{0, layout.height};
    for (int id : in_bounds) {
        const auto& t = layout.terminals[id];
        xs.push_back(t.x);
        xs.push_back(t.x + t.w);
        ys.push_back(t.y);
        ys.push_back(t.y + t.h);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    const std::size_t nx = xs.size() - 1, ny = ys.size() - 1;
    std::vector<char> covered(nx * ny, 0);
    auto index_of = [](const std::vector<Length>& v, Length c) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), c) - v.begin());
    };
    for (int id : in_bounds) {
        const auto& t = layout.terminals[id];
        const std::size_t i0 = index_of(xs, t.x), i1 = index_of(xs, t.x + t.w);
        const std::size_t j0 = index_of(ys, t.y), j1 = index_of(ys, t.y + t.h);
        for (std::size_t j = j0; j < j1; ++j)
            for (std::size_t i = i0; i < i1; ++i) covered[j * nx + i] = 1;
    }

    std::vector<Violation> out;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < covered.size(); ++start) {
        if (covered[start]) continue;
        std::size_t ilo = nx, ihi = 0, jlo = ny, jhi = 0;
        covered[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            const std::size_t i = c % nx, j = c / nx;
            ilo = std::min(ilo, i);
            ihi = std::max(ihi, i + 1);
            jlo = std::min(jlo, j);
            jhi = std::max(jhi, j + 1);
            auto visit = [&](std::size_t n) {
                if (!covered[n]) {
                    covered[n] = 1;
                    stack.push_back(n);
                }
            };
            if (i > 0) visit(c - 1);
            if (i + 1 < nx) visit(c + 1);
            if (j > 0) visit(c - nx);
            if (j + 1 < ny) visit(c + nx);
        }
        Rect box{xs[ilo], ys[jlo], xs[ihi] - xs[ilo], ys[jhi] - ys[jlo]};
        std::ostringstream msg;
        msg << "uncovered area inside " << box;
        out.push_back({ViolationKind::gap, {}, box, msg.str()});
    }
    return out;
}

}  // namespace

std::vector<Violation> validate_layout(const Layout& layout) {
    std::vector<Violation> out;
    if (layout.width <= 0 || layout.height <= 0) {
        out.push_back({ViolationKind::out_of_bounds, {}, layout.domain(), "layout dimensions must be positive"});
        return out;
    }
    const int n = static_cast<int>(layout.terminals.size());
    std::vector<int> in_bounds;
    for (int i = 0; i < n; ++i) {
        const auto& t = layout.terminals[i];
        if (t.label <= kTransparent || t.label >= static_cast<Label>(layout.materials.size())) {
            out.push_back({ViolationKind::bad_label, {i}, t.rect(),
                           "terminal " + std::to_string(i) + " has invalid label " + std::to_string(t.label)});
        }
        if (t.w <= 0 || t.h <= 0 || t.x < 0 || t.y < 0 || t.x + t.w > layout.width ||
            t.y + t.h > layout.height) {
            out.push_back({ViolationKind::out_of_bounds, {i}, t.rect(),
                           "terminal " + std::to_string(i) + " lies outside the domain"});
        } else {
            in_bounds.push_back(i);
        }
    }
    for (std::size_t a = 0; a < in_bounds.size(); ++a) {
        for (std::size_t b = a + 1; b < in_bounds.size(); ++b) {
            const int i = in_bounds[a], j = in_bounds[b];
            if (layout.terminals[i].rect().overlaps(layout.terminals[j].rect())) {
                out.push_back({ViolationKind::overlap, {i, j}, layout.terminals[i].rect(),
                               "terminals " + std::to_string(i) + " and " + std::to_string(j) + " overlap"});
            }
        }
    }
    auto gaps = find_gaps(layout, in_bounds);
    out.insert(out.end(), gaps.begin(), gaps.end());
    return out;
}

void require_valid(const Layout& layout) {
    const auto violations = validate_layout(layout);
    if (violations.empty()) return;
    std::string msg = "invalid layout:";
    for (const auto& v : violations) msg += "\n  " + std::string(to_string(v.kind)) + ": " + v.message;
    throw ValidationError(msg);
}

Layout canonicalize(Layout layout) {
    std::sort(layout.terminals.begin(), layout.terminals.end(),
              [](const TerminalRect& a, const TerminalRect& b) {
                  return BottomLeftOrder{}(a.rect(), b.rect());
              });
    return layout;
}

bool same_layout(const Layout& a, const Layout& b) {
    return canonicalize(a) == canonicalize(b);
}

namespace {

Length get_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ParseError(where + ": key '" + key + "' must be an integer");
    return v.get<Length>();
}

json to_json(const Layout& layout) {
    json j;
    j["version"] = 1;
    j["width"] = layout.width;
    j["height"] = layout.height;
    j["materials"] = layout.materials;
    json terms = json::array();
    for (const auto& t : layout.terminals)
        terms.push_back({{"x", t.x}, {"y", t.y}, {"w", t.w}, {"h", t.h}, {"label", t.label}});
    j["terminals"] = std::move(terms);
    return j;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed layout: ") + e.what());
    }
}

Layout from_json(const json& j) {
    if (!j.is_object()) throw ParseError("layout: top level must be an object");
    if (get_int(j, "version", "layout") != 1) throw ParseError("layout: unsupported version");
    Layout layout;
    layout.width = get_int(j, "width", "layout");
    layout.height = get_int(j, "height", "layout");
    if (!j.contains("materials") || !j["materials"].is_array())
        throw ParseError("layout: 'materials' must be an array of strings");
    for (const auto& m : j["materials"]) {
        if (!m.is_string()) throw ParseError("layout: 'materials' must be an array of strings");
        layout.materials.push_back(m.get<std::string>());
    }
    if (!j.contains("terminals") || !j["terminals"].is_array())
        throw ParseError("layout: 'terminals' must be an array");
    int i = 0;
    for (const auto& t : j["terminals"]) {
        const std::string where = "terminal " + std::to_string(i++);
        if (!t.is_object()) throw ParseError(where + ": must be an object");
        layout.terminals.push_back({get_int(t, "x", where), get_int(t, "y", where), get_int(t, "w", where),
                                    get_int(t, "h", where), static_cast<Label>(get_int(t, "label", where))});
    }
    return layout;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string layout_to_string(const Layout& layout) { return to_json(layout).dump(2) + "\n"; }

Layout layout_from_string(const std::string& text) {
    Layout layout = from_json(parse_json(text));
    require_valid(layout);
    return layout;
}

Layout load_layout(const std::filesystem::path& path) { return layout_from_string(read_file(path)); }

void save_layout(const Layout& layout, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << layout_to_string(layout);
}

std::vector<std::vector<int>> load_size_groups(const std::filesystem::path& path) {
    const json j = parse_json(read_file(path));
    std::vector<std::vector<int>> groups;
    if (!j.is_object() || !j.contains("groups")) return groups;
    if (!j["groups"].is_array()) throw ParseError("layout: 'groups' must be an array of arrays");
    for (const auto& g : j["groups"]) {
        if (!g.is_array()) throw ParseError("layout: 'groups' must be an array of arrays");
        auto& group = groups.emplace_back();
        for (const auto& id : g) {
            if (!id.is_number_integer()) throw ParseError("layout: group members must be terminal ids");
            group.push_back(id.get<int>());
        }
    }
    return groups;
}

}  // namespace facadegram
