#include "facadegram/grammar_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "facadegram/errors.hpp"

namespace facadegram {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string size_text(const SizeSpec& s) {
    return s.is_relative() ? "~" + format_number(s.value) : std::to_string(static_cast<Length>(s.value));
}

std::string join_sizes(const std::vector<SizeSpec>& sizes) {
    std::string out;
    for (std::size_t i = 0; i < sizes.size(); ++i) out += (i ? " | " : "") + size_text(sizes[i]);
    return out;
}

}  // namespace

std::string grammar_to_text(const Grammar& g) {
    std::ostringstream os;
    os << "# split grammar\nversion 1\nmaterials";
    for (const auto& m : g.materials) os << ' ' << m;
    os << '\n';
    if (g.source_size) os << "size " << g.source_size->first << ' ' << g.source_size->second << '\n';
    os << "start";
    for (const auto& s : g.starts) os << ' ' << s;
    os << "\n\n";
    for (const auto& r : g.rules) {
        os << r.lhs << " -> ";
        if (r.weight != 1.0) os << '(' << format_number(r.weight) << ") ";
        os << to_string(r.op);
        if (r.op == OpKind::gridsplit) {
            os << "{ " << join_sizes(r.columns) << " ; " << join_sizes(r.rows);
            for (std::size_t row = 0; row < r.rows.size(); ++row) {
                os << " ;";
                for (std::size_t c = 0; c < r.columns.size(); ++c)
                    os << (c ? " | " : " ") << r.cells[row * r.columns.size() + c];
            }
            os << " }\n";
            continue;
        }
        os << '(' << axis_name(r.axis) << "){ ";
        for (std::size_t i = 0; i < r.successors.size(); ++i)
            os << (i ? " | " : "") << size_text(r.successors[i].size) << ": " << r.successors[i].symbol;
        os << " }\n";
    }
    return os.str();
}

namespace {

enum class Tok { ident, number, tilde, arrow, lparen, rparen, lbrace, rbrace, bar, semi, colon, end };

struct Token {
    Tok kind;
    std::string text;
    int column;
};

class LineLexer {
public:
    LineLexer(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

    std::vector<Token> tokenize() {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < line_.size()) {
            const char c = line_[i];
            const int col = static_cast<int>(i) + 1;
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (c == '#') {
                break;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[j])) || line_[j] == '_' ||
                                            line_[j] == '.'))
                    ++j;
                out.push_back({Tok::ident, std::string(line_.substr(i, j - i)), col});
                i = j;
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t j = i;
                while (j < line_.size() && (std::isdigit(static_cast<unsigned char>(line_[j])) || line_[j] == '.' ||
                                            line_[j] == 'e' || line_[j] == 'E' ||
                                            ((line_[j] == '-' || line_[j] == '+') && j > i &&
                                             (line_[j - 1] == 'e' || line_[j - 1] == 'E'))))
                    ++j;
                out.push_back({Tok::number, std::string(line_.substr(i, j - i)), col});
                i = j;
            } else if (c == '-' && i + 1 < line_.size() && line_[i + 1] == '>') {
                out.push_back({Tok::arrow, "->", col});
                i += 2;
            } else {
                Tok k;
                switch (c) {
                    case '~': k = Tok::tilde; break;
                    case '(': k = Tok::lparen; break;
                    case ')': k = Tok::rparen; break;
                    case '{': k = Tok::lbrace; break;
                    case '}': k = Tok::rbrace; break;
                    case '|': k = Tok::bar; break;
                    case ';': k = Tok::semi; break;
                    case ':': k = Tok::colon; break;
                    default:
                        throw ParseError(std::string("unexpected character '") + c + "'", line_no_, col);
                }
                out.push_back({k, std::string(1, c), col});
                ++i;
            }
        }
        out.push_back({Tok::end, "", static_cast<int>(line_.size()) + 1});
        return out;
    }

private:
    std::string_view line_;
    int line_no_;
};

class LineParser {
public:
    LineParser(std::vector<Token> toks, int line_no) : toks_(std::move(toks)), line_no_(line_no) {}

    const Token& peek() const { return toks_[pos_]; }
    bool at(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no_, peek().column); }

    Token expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what + (peek().text.empty() ? "" : ", found '" + peek().text + "'"));
        return toks_[pos_++];
    }

    double number() {
        const Token t = expect(Tok::number, "a number");
        double v = 0.0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
            throw ParseError("malformed number '" + t.text + "'", line_no_, t.column);
        return v;
    }

    Length integer() {
        const int col = peek().column;
        const double v = number();
        if (v != std::floor(v)) throw ParseError("expected a whole number", line_no_, col);
        return static_cast<Length>(v);
    }

    SizeSpec size() {
        if (at(Tok::tilde)) {
            ++pos_;
            return SizeSpec::relative(number());
        }
        const int col = peek().column;
        const double v = number();
        if (v != std::floor(v))
            throw ParseError("absolute sizes are whole length units (use ~ for weights)", line_no_, col);
        return SizeSpec::absolute(static_cast<Length>(v));
    }

    std::vector<SizeSpec> size_list() {
        std::vector<SizeSpec> out{size()};
        while (at(Tok::bar)) {
            ++pos_;
            out.push_back(size());
        }
        return out;
    }

    Rule rule(std::string lhs) {
        Rule r;
        r.lhs = std::move(lhs);
        if (at(Tok::lparen)) {
            ++pos_;
            r.weight = number();
            expect(Tok::rparen, "')'");
        }
        const Token op_tok = expect(Tok::ident, "an operator name");
        const auto op = parse_op(op_tok.text);
        if (!op) throw ParseError("unknown operator '" + op_tok.text + "'", line_no_, op_tok.column);
        r.op = *op;
        if (r.op == OpKind::gridsplit) {
            expect(Tok::lbrace, "'{'");
            r.columns = size_list();
            expect(Tok::semi, "';'");
            r.rows = size_list();
            for (std::size_t row = 0; row < r.rows.size(); ++row) {
                expect(Tok::semi, "';'");
                for (std::size_t c = 0; c < r.columns.size(); ++c) {
                    if (c) expect(Tok::bar, "'|'");
                    r.cells.push_back(expect(Tok::ident, "a symbol").text);
                }
            }
            expect(Tok::rbrace, "'}'");
        } else {
            expect(Tok::lparen, "'('");
            const Token axis = expect(Tok::ident, "an axis");
            if (axis.text == "x" || axis.text == "X") r.axis = Axis::x;
            else if (axis.text == "y" || axis.text == "Y") r.axis = Axis::y;
            else throw ParseError("axis must be x or y", line_no_, axis.column);
            expect(Tok::rparen, "')'");
            expect(Tok::lbrace, "'{'");
            do {
                if (at(Tok::bar)) ++pos_;
                Successor s;
                s.size = size();
                expect(Tok::colon, "':'");
                s.symbol = expect(Tok::ident, "a symbol").text;
                r.successors.push_back(std::move(s));
            } while (at(Tok::bar));
            expect(Tok::rbrace, "'}'");
        }
        expect(Tok::end, "end of line");
        return r;
    }

    std::vector<std::string> identifiers() {
        std::vector<std::string> out;
        while (at(Tok::ident)) out.push_back(toks_[pos_++].text);
        expect(Tok::end, "end of line");
        return out;
    }

    void advance() { ++pos_; }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_no_;
};

}  // namespace

Grammar grammar_from_text(std::string_view text) {
    Grammar g;
    bool have_version = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        ++line_no;
        LineParser p(LineLexer(line, line_no).tokenize(), line_no);
        if (p.at(Tok::end)) continue;
        const Token head = p.expect(Tok::ident, "a keyword or symbol");
        if (p.at(Tok::arrow)) {
            p.advance();
            g.rules.push_back(p.rule(head.text));
        } else if (head.text == "version") {
            if (p.integer() != 1) throw ParseError("unsupported grammar version", line_no, head.column);
            p.expect(Tok::end, "end of line");
            have_version = true;
        } else if (head.text == "materials") {
            g.materials = p.identifiers();
        } else if (head.text == "start") {
            g.starts = p.identifiers();
        } else if (head.text == "size") {
            const Length w = p.integer();
            const Length h = p.integer();
            p.expect(Tok::end, "end of line");
            g.source_size = std::make_pair(w, h);
        } else {
            throw ParseError("expected '->' after symbol '" + head.text + "'", line_no, head.column);
        }
    }
    if (!have_version) throw ParseError("missing 'version 1' line");
    check_grammar(g);
    return g;
}

namespace {

using json = nlohmann::ordered_json;

json size_json(const SizeSpec& s) {
    if (s.is_relative()) return json{{"weight", s.value}};
    return json{{"size", static_cast<Length>(s.value)}};
}

SizeSpec size_from_json(const json& j) {
    if (j.contains("weight")) return SizeSpec::relative(j.at("weight").get<double>());
    if (j.contains("size") && j.at("size").is_number_integer()) return SizeSpec::absolute(j.at("size").get<Length>());
    throw ParseError("grammar: size entries need an integer 'size' or a 'weight'");
}

}  // namespace

std::string grammar_to_json(const Grammar& g) {
    json j;
    j["version"] = 1;
    j["materials"] = g.materials;
    j["start"] = g.start();
    if (g.starts.size() > 1) j["starts"] = g.starts;
    if (g.source_size) j["size"] = {g.source_size->first, g.source_size->second};
    json rules = json::array();
    for (const auto& r : g.rules) {
        json jr;
        jr["lhs"] = r.lhs;
        jr["op"] = to_string(r.op);
        if (r.weight != 1.0) jr["weight"] = r.weight;
        if (r.op == OpKind::gridsplit) {
            jr["columns"] = json::array();
            for (const auto& s : r.columns) jr["columns"].push_back(size_json(s));
            jr["rows"] = json::array();
            for (const auto& s : r.rows) jr["rows"].push_back(size_json(s));
            jr["cells"] = r.cells;
        } else {
            jr["axis"] = std::string(1, axis_name(r.axis));
            jr["successors"] = json::array();
            for (const auto& s : r.successors) {
                json js = size_json(s.size);
                js["symbol"] = s.symbol;
                jr["successors"].push_back(std::move(js));
            }
        }
        rules.push_back(std::move(jr));
    }
    j["rules"] = std::move(rules);
    return j.dump(2) + "\n";
}

Grammar grammar_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed grammar: ") + e.what());
    }
    Grammar g;
    try {
        if (j.at("version").get<int>() != 1) throw ParseError("grammar: unsupported version");
        g.materials = j.at("materials").get<std::vector<std::string>>();
        if (j.contains("starts")) g.starts = j.at("starts").get<std::vector<std::string>>();
        else g.starts = {j.at("start").get<std::string>()};
        if (j.contains("size")) g.source_size = std::make_pair(j["size"].at(0).get<Length>(), j["size"].at(1).get<Length>());
        for (const auto& jr : j.at("rules")) {
            Rule r;
            r.lhs = jr.at("lhs").get<std::string>();
            const auto op = parse_op(jr.at("op").get<std::string>());
            if (!op) throw ParseError("grammar: unknown operator '" + jr.at("op").get<std::string>() + "'");
            r.op = *op;
            if (jr.contains("weight")) r.weight = jr.at("weight").get<double>();
            if (r.op == OpKind::gridsplit) {
                for (const auto& s : jr.at("columns")) r.columns.push_back(size_from_json(s));
                for (const auto& s : jr.at("rows")) r.rows.push_back(size_from_json(s));
                r.cells = jr.at("cells").get<std::vector<std::string>>();
            } else {
                const auto axis = jr.at("axis").get<std::string>();
                if (axis != "x" && axis != "y") throw ParseError("grammar: axis must be x or y");
                r.axis = axis == "x" ? Axis::x : Axis::y;
                for (const auto& js : jr.at("successors"))
                    r.successors.push_back({size_from_json(js), js.at("symbol").get<std::string>()});
            }
            g.rules.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("grammar: ") + e.what());
    }
    check_grammar(g);
    return g;
}

Grammar load_grammar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return path.extension() == ".json" ? grammar_from_json(ss.str()) : grammar_from_text(ss.str());
}

void save_grammar(const Grammar& grammar, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << (path.extension() == ".json" ? grammar_to_json(grammar) : grammar_to_text(grammar));
}

}  // namespace facadegram
