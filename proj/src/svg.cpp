#include "facadegram/svg.hpp"

#include <array>
#include <sstream>

namespace facadegram {

namespace {

constexpr std::array<const char*, 12> kPalette{"#ffffff", "#c9b79c", "#6fa8dc", "#e6b8af", "#93c47d", "#f6b26b",
                                               "#8e7cc3", "#ffd966", "#76a5af", "#d5a6bd", "#a2c4c9", "#b6d7a8"};
constexpr std::array<const char*, 8> kStroke{"#cc0000", "#0b5394", "#38761d", "#b45f06",
                                             "#741b47", "#134f5c", "#7f6000", "#20124d"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Canvas {
    const Layout& layout;
    double scale;

    double X(Length x) const { return static_cast<double>(x) * scale; }
    double Y(Length y) const { return static_cast<double>(layout.height - y) * scale; }

    void open(std::ostream& os) const {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << X(layout.width) << "\" height=\""
           << static_cast<double>(layout.height) * scale << "\" viewBox=\"0 0 " << X(layout.width) << ' '
           << static_cast<double>(layout.height) * scale << "\">\n";
    }

    void rect(std::ostream& os, const Rect& r, const std::string& style) const {
        os << "  <rect x=\"" << X(r.x) << "\" y=\"" << Y(r.top()) << "\" width=\"" << X(r.w) << "\" height=\""
           << static_cast<double>(r.h) * scale << "\" " << style << "/>\n";
    }

    void terminals(std::ostream& os) const {
        for (const auto& t : layout.terminals) {
            const std::string name =
                t.label >= 0 && static_cast<std::size_t>(t.label) < layout.materials.size() ? layout.materials[t.label] : "";
            std::string style = "fill=\"" + std::string(material_color(t.label)) +
                                "\" stroke=\"#333333\" stroke-width=\"0.5\" data-material=\"" + escape(name) + "\"";
            rect(os, t.rect(), style);
        }
    }
};

}  // namespace

const char* material_color(Label label) {
    return kPalette[static_cast<std::size_t>(label < 0 ? 0 : label) % kPalette.size()];
}

std::string layout_to_svg(const Layout& layout, double scale) {
    std::ostringstream os;
    const Canvas c{layout, scale};
    c.open(os);
    c.terminals(os);
    os << "</svg>\n";
    return os.str();
}

std::string split_tree_to_svg(const Derivation& derivation, const Grammar& grammar, double scale) {
    std::ostringstream os;
    const Canvas c{derivation.layout, scale};
    c.open(os);
    c.terminals(os);
    os << "  <g fill=\"none\">\n";
    for (const auto& node : derivation.tree.nodes) {
        if (node.is_leaf()) continue;
        const char* color = kStroke[static_cast<std::size_t>(node.rule) % kStroke.size()];
        c.rect(os, node.rect,
               "stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" data-rule=\"" +
                   escape(grammar.rules[static_cast<std::size_t>(node.rule)].lhs) + "\"");
        os << "  <text x=\"" << c.X(node.rect.x) + 2 << "\" y=\"" << c.Y(node.rect.top()) + 10
           << "\" font-size=\"9\" fill=\"" << color << "\">" << escape(node.symbol) << "</text>\n";
    }
    os << "  </g>\n</svg>\n";
    return os.str();
}

}  // namespace facadegram
