// facadegram: command-line front end.
//
// Exit codes: 0 success, 1 input error (missing file, parse or validation
// failure, bad flags), 2 model error (derivation, infeasible constraints,
// layout not expressible as a split grammar), 3 internal error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "facadegram/candidates.hpp"
#include "facadegram/errors.hpp"
#include "facadegram/eval.hpp"
#include "facadegram/grammar_io.hpp"
#include "facadegram/optimizer.hpp"
#include "facadegram/regularize.hpp"
#include "facadegram/svg.hpp"
#include "facadegram/symmetry.hpp"
#include "facadegram/variation.hpp"

namespace fs = std::filesystem;
using namespace facadegram;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitModel = 2;
constexpr int kExitInternal = 3;

class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw Error("no such file: " + path);
}

struct SearchFlags {
    int iterations = 2000;
    std::uint64_t seed = 0;
    std::string method = "adp";
    double lambda1 = 1.0, lambda2 = 1.0;
    double epsilon0 = 0.9;
    double tau = 0.0;
    std::string ops = "split,repeat,repeatABA,symsplit,gridsplit";
    bool protect = false;
    int threads = 1;
    std::size_t max_candidates = 64;
};

struct CostFlags {
    double split = 0.1, repeat = 0.5, repeat_aba = 0.5, symsplit = 0.5, gridsplit = 0.1;
    double per_symbol = 1.0;
    bool no_op_cost = false, no_symbol_cost = false;

    CostModel model() const {
        CostModel m;
        m.cost_of(OpKind::split) = split;
        m.cost_of(OpKind::repeat) = repeat;
        m.cost_of(OpKind::repeat_aba) = repeat_aba;
        m.cost_of(OpKind::symsplit) = symsplit;
        m.cost_of(OpKind::gridsplit) = gridsplit;
        m.per_symbol_cost = per_symbol;
        m.use_op_cost = !no_op_cost;
        m.use_symbol_cost = !no_symbol_cost;
        return m;
    }
};

void add_cost_flags(CLI::App* cmd, CostFlags& f) {
    cmd->add_option("--cost-split", f.split, "Operator cost of split")->capture_default_str();
    cmd->add_option("--cost-repeat", f.repeat, "Operator cost of repeat")->capture_default_str();
    cmd->add_option("--cost-repeat-aba", f.repeat_aba, "Operator cost of repeatABA")->capture_default_str();
    cmd->add_option("--cost-symsplit", f.symsplit, "Operator cost of symsplit")->capture_default_str();
    cmd->add_option("--cost-gridsplit", f.gridsplit, "Operator cost of gridsplit")->capture_default_str();
    cmd->add_option("--cost-symbol", f.per_symbol, "Cost per listed successor")->capture_default_str();
    cmd->add_flag("--no-op-cost", f.no_op_cost, "Drop the operator term");
    cmd->add_flag("--no-symbol-cost", f.no_symbol_cost, "Drop the successor-count term");
}

void add_search_flags(CLI::App* cmd, SearchFlags& f, bool with_method) {
    cmd->add_option("--iterations", f.iterations, "Search iterations")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    if (with_method)
        cmd->add_option("--method", f.method, "Search method")->check(CLI::IsMember({"adp", "greedy", "is"}))->capture_default_str();
    cmd->add_option("--lambda1", f.lambda1, "Heuristic weight of the rule cost")->capture_default_str();
    cmd->add_option("--lambda2", f.lambda2, "Heuristic weight of the cut cost")->capture_default_str();
    cmd->add_option("--epsilon0", f.epsilon0, "Initial exploration probability")->capture_default_str();
    cmd->add_option("--tau", f.tau, "Exploration decay constant (default iterations/5)");
    cmd->add_option("--ops", f.ops, "Enabled operators, comma separated")->capture_default_str();
    cmd->add_option("--max-candidates", f.max_candidates, "Candidates kept per region")->capture_default_str();
    cmd->add_flag("--protect", f.protect, "Protect sampled repeated regions from being cut");
    cmd->add_option("--threads", f.threads, "Parallel iterations per batch")->capture_default_str();
}

SearchConfig make_config(const SearchFlags& s, const CostFlags& c) {
    SearchConfig cfg;
    cfg.iterations = s.iterations;
    cfg.seed = s.seed;
    cfg.epsilon0 = s.epsilon0;
    cfg.tau = s.tau;
    cfg.cost = c.model();
    cfg.heuristic.lambda1 = s.lambda1;
    cfg.heuristic.lambda2 = s.lambda2;
    cfg.heuristic.max_candidates = s.max_candidates;
    cfg.ops = parse_op_set(s.ops);
    cfg.protect_regions = s.protect;
    cfg.threads = s.threads;
    cfg.validate();
    return cfg;
}

Method method_of(const std::string& name) {
    auto m = parse_method(name);
    if (!m) throw ValidationError("unknown method '" + name + "'");
    return *m;
}

// Derives `grammar` from `start` and checks it reproduces `layout`.
void self_check(const Grammar& grammar, const Layout& layout, std::string_view start = {}) {
    const Derivation d = derive(grammar, layout.width, layout.height, 0, start);
    if (!same_layout(d.layout, layout)) throw InternalError("inferred grammar does not reproduce its input layout");
    const Grammar reread = grammar_from_text(grammar_to_text(grammar));
    if (!(reread == grammar)) throw InternalError("grammar text form does not round-trip");
}

bool looks_like_layout(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    return text.find("\"terminals\"") != std::string::npos;
}

// Costs are sums of decimal constants; hide binary rounding noise.
std::string format_cost(double v) { return format_number(std::round(v * 1e9) / 1e9); }

std::pair<Length, Length> target_size(const Grammar& g, Length width, Length height) {
    if (width > 0 && height > 0) return {width, height};
    if (!g.source_size) throw ValidationError("grammar has no recorded size; pass --width and --height");
    return {width > 0 ? width : g.source_size->first, height > 0 ? height : g.source_size->second};
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("facadegram");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("FACADEGRAM_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

    CLI::App app{"Split grammar induction for facade layouts"};
    app.footer("Exit codes: 0 ok, 1 input error, 2 model error (derivation, infeasible, unexplainable), 3 internal error.\n"
               "Set FACADEGRAM_LOG=debug|info|warn|error to change logging.");
    app.require_subcommand(1);

    SearchFlags search;
    CostFlags costs;

    // infer
    std::string in_path, out_path, report_path, history_path, svg_path;
    auto* infer_cmd = app.add_subcommand("infer", "Extract a grammar from a layout");
    infer_cmd->add_option("layout", in_path, "Layout file")->required();
    infer_cmd->add_option("-o,--output", out_path, "Grammar output (.grammar text or .json)");
    infer_cmd->add_option("--report", report_path, "Write a JSON search report");
    infer_cmd->add_option("--history", history_path, "Write per-iteration CSV");
    infer_cmd->add_option("--svg", svg_path, "Write the split tree as SVG");
    add_search_flags(infer_cmd, search, true);
    add_cost_flags(infer_cmd, costs);

    // derive
    std::string grammar_path;
    Length width = 0, height = 0;
    std::uint64_t seed = 0;
    auto* derive_cmd = app.add_subcommand("derive", "Apply a grammar to a domain");
    derive_cmd->add_option("grammar", grammar_path, "Grammar file")->required();
    derive_cmd->add_option("-o,--output", out_path, "Layout output");
    derive_cmd->add_option("--width", width, "Domain width (default: grammar's source size)");
    derive_cmd->add_option("--height", height, "Domain height (default: grammar's source size)");
    derive_cmd->add_option("--seed", seed, "Seed for stochastic grammars");
    derive_cmd->add_option("--svg", svg_path, "Write the split tree as SVG");

    // cost
    auto* cost_cmd = app.add_subcommand("cost", "Print a grammar's description length");
    cost_cmd->add_option("grammar", grammar_path, "Grammar file")->required();
    add_cost_flags(cost_cmd, costs);

    // compare
    std::string other_path, layout_path;
    auto* compare_cmd = app.add_subcommand("compare", "Precision/recall of non-terminal regions");
    compare_cmd->add_option("candidate", grammar_path, "Candidate grammar")->required();
    compare_cmd->add_option("reference", other_path, "Reference grammar")->required();
    compare_cmd->add_option("--layout", layout_path, "Layout both grammars derive")->required();

    // render
    bool tree = false;
    auto* render_cmd = app.add_subcommand("render", "Write SVG for a layout or a grammar derivation");
    render_cmd->add_option("input", in_path, "Layout or grammar file")->required();
    render_cmd->add_option("-o,--output", out_path, "SVG output")->required();
    render_cmd->add_flag("--tree", tree, "Outline the split tree (grammar input)");
    render_cmd->add_option("--width", width, "Domain width for grammar input");
    render_cmd->add_option("--height", height, "Domain height for grammar input");
    render_cmd->add_option("--seed", seed, "Seed for stochastic grammars");

    // regularize
    std::string groups_path;
    auto* reg_cmd = app.add_subcommand("regularize", "Least-squares cleanup of a layout");
    reg_cmd->add_option("layout", in_path, "Layout file")->required();
    reg_cmd->add_option("-o,--output", out_path, "Layout output")->required();
    reg_cmd->add_option("--groups", groups_path, "File with a \"groups\" key (default: the input's, else same-label groups)");

    // joint
    std::vector<std::string> inputs;
    bool individual = false;
    auto* joint_cmd = app.add_subcommand("joint", "Extract one grammar for several layouts");
    joint_cmd->add_option("layouts", inputs, "Layout files")->required()->expected(2, -1);
    joint_cmd->add_option("-o,--output", out_path, "Grammar output");
    joint_cmd->add_option("--report", report_path, "Write a JSON search report");
    joint_cmd->add_flag("--individual", individual, "Also extract each layout alone and print the cost sum");
    add_search_flags(joint_cmd, search, true);
    add_cost_flags(joint_cmd, costs);

    // variations
    int count = 10;
    Length thin = kDefaultThinThreshold;
    bool align = false, keep_sizes = false;
    std::vector<std::string> merge_paths;
    std::vector<double> weights;
    std::string out_dir = "variations";
    auto* var_cmd = app.add_subcommand("variations", "Derive resized or stochastic layouts");
    var_cmd->add_option("grammar", grammar_path, "Grammar file")->required();
    var_cmd->add_option("-n,--count", count, "Number of layouts")->capture_default_str();
    var_cmd->add_option("--width", width, "Target width");
    var_cmd->add_option("--height", height, "Target height");
    var_cmd->add_option("--seed", seed, "First seed; layout i uses seed + i")->capture_default_str();
    var_cmd->add_option("--thin-threshold", thin, "Sizes up to this stay absolute")->capture_default_str();
    var_cmd->add_flag("--keep-sizes", keep_sizes, "Do not convert sizes to relative weights");
    var_cmd->add_flag("--align", align, "Equalize same-slot elements after derivation");
    var_cmd->add_option("--merge", merge_paths, "Further grammars to combine with the first");
    var_cmd->add_option("--weights", weights, "One weight per grammar (default 1 each)");
    var_cmd->add_option("-o,--output", out_dir, "Output directory")->capture_default_str();

    // benchmark
    std::string methods_list = "adp,greedy,is";
    int runs = 10, jobs = 1;
    auto* bench_cmd = app.add_subcommand("benchmark", "Cost, rule count and time per layout and method");
    bench_cmd->add_option("layouts", inputs, "Layout files")->required()->expected(1, -1);
    bench_cmd->add_option("--methods", methods_list, "Comma separated: adp, greedy, is")->capture_default_str();
    bench_cmd->add_option("--runs", runs, "Runs per cell with consecutive seeds")->capture_default_str();
    bench_cmd->add_option("--jobs", jobs, "Cells evaluated in parallel")->capture_default_str();
    bench_cmd->add_option("-o,--output", out_path, "CSV output (default stdout)");
    add_search_flags(bench_cmd, search, false);
    add_cost_flags(bench_cmd, costs);

    // debugging dumps
    auto* sym_cmd = app.add_subcommand("symmetry", "Dump the repeated-region index of a layout");
    sym_cmd->add_option("layout", in_path, "Layout file")->required();
    std::vector<Length> region_rect;
    auto* cand_cmd = app.add_subcommand("candidates", "Dump candidate rules with heuristic values");
    cand_cmd->add_option("layout", in_path, "Layout file")->required();
    cand_cmd->add_option("--region", region_rect, "x y w h (default: whole layout)")->expected(4);
    add_search_flags(cand_cmd, search, false);
    add_cost_flags(cand_cmd, costs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (infer_cmd->parsed()) {
            require_file(in_path);
            const Layout layout = load_layout(in_path);
            const SearchConfig cfg = make_config(search, costs);
            spdlog::info("inferring {} ({} terminals) with {}", in_path, layout.terminals.size(), search.method);
            const SearchReport rep = infer_with(method_of(search.method), layout, cfg);
            self_check(rep.grammar, layout);
            if (!out_path.empty()) save_grammar(rep.grammar, out_path);
            else std::cout << grammar_to_text(rep.grammar);
            if (!report_path.empty()) write_file(report_path, report_to_json(rep));
            if (!history_path.empty()) write_file(history_path, history_to_csv(rep));
            if (!svg_path.empty()) {
                const Derivation d = derive(rep.grammar, layout.width, layout.height);
                write_file(svg_path, split_tree_to_svg(d, rep.grammar));
            }
            std::cerr << "cost " << format_cost(rep.best_cost) << " rules " << rep.rule_count << " aborted "
                      << rep.aborted << " time_ms " << format_number(rep.elapsed_ms) << "\n";
        } else if (derive_cmd->parsed()) {
            require_file(grammar_path);
            const Grammar g = load_grammar(grammar_path);
            const auto [w, h] = target_size(g, width, height);
            const Derivation d = derive(g, w, h, seed);
            if (!out_path.empty()) save_layout(d.layout, out_path);
            else std::cout << layout_to_string(d.layout);
            if (!svg_path.empty()) write_file(svg_path, split_tree_to_svg(d, g));
        } else if (cost_cmd->parsed()) {
            require_file(grammar_path);
            const Grammar g = load_grammar(grammar_path);
            std::cout << format_cost(grammar_cost(g, costs.model())) << "\n";
        } else if (compare_cmd->parsed()) {
            require_file(grammar_path);
            require_file(other_path);
            require_file(layout_path);
            const auto r = compare(load_grammar(grammar_path), load_grammar(other_path), load_layout(layout_path));
            std::cout << "P=" << format_number(r.precision) << " R=" << format_number(r.recall)
                      << " F=" << format_number(r.f_score) << " common=" << r.common_regions
                      << " regions_a=" << r.regions_a << " regions_b=" << r.regions_b << "\n";
        } else if (render_cmd->parsed()) {
            require_file(in_path);
            if (looks_like_layout(in_path)) {
                write_file(out_path, layout_to_svg(load_layout(in_path)));
            } else {
                const Grammar g = load_grammar(in_path);
                const auto [w, h] = target_size(g, width, height);
                const Derivation d = derive(g, w, h, seed);
                write_file(out_path, tree ? split_tree_to_svg(d, g) : layout_to_svg(d.layout));
            }
        } else if (reg_cmd->parsed()) {
            require_file(in_path);
            const Layout layout = load_layout(in_path);
            SizeGroups groups = load_size_groups(groups_path.empty() ? in_path : groups_path);
            if (groups.empty()) groups = default_size_groups(layout);
            const Layout out = regularize(layout, groups);
            save_layout(out, out_path);
            std::cerr << "objective " << format_number(fit_objective(layout, out)) << "\n";
        } else if (joint_cmd->parsed()) {
            std::vector<Layout> layouts;
            for (const auto& p : inputs) {
                require_file(p);
                layouts.push_back(load_layout(p));
            }
            const SearchConfig cfg = make_config(search, costs);
            const Method method = method_of(search.method);
            const SearchReport rep = infer_joint(layouts, cfg, method);
            for (std::size_t i = 0; i < layouts.size(); ++i) self_check(rep.grammar, layouts[i], rep.grammar.starts[i]);
            if (!out_path.empty()) save_grammar(rep.grammar, out_path);
            else std::cout << grammar_to_text(rep.grammar);
            if (!report_path.empty()) write_file(report_path, report_to_json(rep));
            std::cerr << "joint cost " << format_cost(rep.best_cost) << " rules " << rep.rule_count << "\n";
            if (individual) {
                double sum = 0.0;
                std::size_t rules = 0;
                for (const auto& l : layouts) {
                    const auto single = infer_with(method, l, cfg);
                    sum += single.best_cost;
                    rules += single.rule_count;
                }
                std::cerr << "individual cost " << format_cost(sum) << " rules " << rules << "\n";
            }
        } else if (var_cmd->parsed()) {
            std::vector<Grammar> grammars;
            for (const auto& p : std::vector<std::string>{grammar_path}) {
                require_file(p);
                grammars.push_back(load_grammar(p));
            }
            for (const auto& p : merge_paths) {
                require_file(p);
                grammars.push_back(load_grammar(p));
            }
            if (weights.empty()) weights.assign(grammars.size(), 1.0);
            Grammar g = grammars.front();
            if (grammars.size() > 1) {
                const MergeResult m = merge_grammars(grammars, weights);
                spdlog::info("merged: {} symbols, {} unified, {} stochastic", m.stats.symbols, m.stats.unified,
                             m.stats.stochastic_symbols);
                g = m.grammar;
            }
            if (!keep_sizes) g = make_size_independent(g, thin);
            const auto [w, h] = target_size(g, width, height);
            fs::create_directories(out_dir);
            for (int i = 0; i < count; ++i) {
                const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
                Derivation d = derive_resized(g, w, h, s);
                if (align) {
                    try {
                        d.layout = align_layout(alignment_problem(d));
                    } catch (const InfeasibleError& e) {
                        spdlog::warn("variation {}: alignment skipped: {}", i, e.what());
                    }
                }
                const fs::path base = fs::path(out_dir) / ("variation_" + std::to_string(i));
                save_layout(d.layout, base.string() + ".json");
                write_file(base.string() + ".svg", layout_to_svg(d.layout));
            }
            std::cerr << "wrote " << count << " layouts to " << out_dir << "\n";
        } else if (bench_cmd->parsed()) {
            std::vector<BenchmarkInput> layouts;
            for (const auto& p : inputs) {
                require_file(p);
                layouts.push_back({fs::path(p).stem().string(), load_layout(p)});
            }
            std::vector<Method> methods;
            std::stringstream ss(methods_list);
            for (std::string m; std::getline(ss, m, ',');) methods.push_back(method_of(m));
            const SearchConfig cfg = make_config(search, costs);
            const auto rows = benchmark(layouts, methods, cfg, {runs, jobs});
            for (const auto& r : rows)
                if (r.failed) spdlog::warn("{} / {}: {}", r.layout_id, to_string(r.method), r.error);
            const std::string csv = benchmark_to_csv(rows);
            if (!out_path.empty()) write_file(out_path, csv);
            else std::cout << csv;
        } else if (sym_cmd->parsed()) {
            require_file(in_path);
            const Layout layout = load_layout(in_path);
            std::cout << build_symmetry_index(LayoutGrid(layout)).dump();
        } else if (cand_cmd->parsed()) {
            require_file(in_path);
            const Layout layout = load_layout(in_path);
            const SearchConfig cfg = make_config(search, costs);
            const LayoutGrid grid(layout);
            const SymmetryIndex index = build_symmetry_index(grid);
            const Rect r = region_rect.empty() ? layout.domain()
                                               : Rect{region_rect[0], region_rect[1], region_rect[2], region_rect[3]};
            if (!grid.is_tiled(r)) throw ValidationError("region is not tiled by whole terminals");
            const auto cands = enumerate_candidates(grid, grid.region(r), index, cfg.cost, cfg.heuristic, cfg.ops);
            for (const auto& c : cands) {
                std::cout << format_number(c.heuristic) << ' ' << to_string(c.op) << '(' << axis_name(c.axis)
                          << ") listed=" << c.listed << " cut=" << format_number(c.cut_cost) << " cuts=";
                for (std::size_t i = 0; i < c.cuts.size(); ++i) std::cout << (i ? "," : "") << c.cuts[i];
                if (!c.row_cuts.empty()) {
                    std::cout << " rows=";
                    for (std::size_t i = 0; i < c.row_cuts.size(); ++i) std::cout << (i ? "," : "") << c.row_cuts[i];
                }
                std::cout << "\n";
            }
        }
    } catch (const InternalError& e) {
        spdlog::error("internal error: {}", e.what());
        return kExitInternal;
    } catch (const DerivationError& e) {
        spdlog::error("{}", e.what());
        return kExitModel;
    } catch (const InfeasibleError& e) {
        spdlog::error("{}", e.what());
        return kExitModel;
    } catch (const UnexplainableLayoutError& e) {
        spdlog::error("{}", e.what());
        return kExitModel;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
