// Regenerates the bundled corpus: derives every grammar in the grammar
// directory and adds rows, grids and random guillotine layouts.
//
//   facadegram_corpus <grammar-dir> <corpus-dir>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "facadegram/grammar_io.hpp"

namespace fs = std::filesystem;
using namespace facadegram;

namespace {

Layout row(const std::vector<std::string>& materials, const std::vector<std::pair<Length, Label>>& cells, Axis axis,
           Length thickness) {
    Layout l;
    l.materials = materials;
    Length pos = 0;
    for (const auto& [size, label] : cells) {
        if (axis == Axis::x) l.terminals.push_back({pos, 0, size, thickness, label});
        else l.terminals.push_back({0, pos, thickness, size, label});
        pos += size;
    }
    l.width = axis == Axis::x ? pos : thickness;
    l.height = axis == Axis::x ? thickness : pos;
    return canonicalize(l);
}

Layout grid(int cols, int rows, Length cell, const std::vector<std::string>& materials, bool checker) {
    Layout l;
    l.materials = materials;
    l.width = cols * cell;
    l.height = rows * cell;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            l.terminals.push_back({c * cell, r * cell, cell, cell, checker ? 1 + (r + c) % 2 : 1});
    return canonicalize(l);
}

// Recursive guillotine cuts on a 100-unit lattice.
void guillotine(Layout& l, const Rect& r, std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> coin(0, 99);
    const bool can_x = r.w >= 200, can_y = r.h >= 200;
    if (depth == 0 || (!can_x && !can_y) || (depth < 3 && coin(rng) < 25)) {
        const auto label = static_cast<Label>(1 + coin(rng) % (static_cast<int>(l.materials.size()) - 1));
        l.terminals.push_back({r.x, r.y, r.w, r.h, label});
        return;
    }
    const Axis axis = can_x && (!can_y || coin(rng) < 50) ? Axis::x : Axis::y;
    const Length steps = r.extent(axis) / 100;
    std::uniform_int_distribution<Length> at(1, steps - 1);
    const Length cut = at(rng) * 100;
    guillotine(l, slab(r, axis, 0, cut), rng, depth - 1);
    guillotine(l, slab(r, axis, cut, r.extent(axis)), rng, depth - 1);
}

Layout random_guillotine(std::uint64_t seed, Length w, Length h, int depth) {
    Layout l;
    l.materials = {"transparent", "Wall", "Window", "Door"};
    l.width = w;
    l.height = h;
    std::mt19937_64 rng(seed);
    guillotine(l, l.domain(), rng, depth);
    return canonicalize(l);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: facadegram_corpus <grammar-dir> <corpus-dir>\n";
        return 1;
    }
    const fs::path grammars = argv[1], out = argv[2];
    fs::create_directories(out);
    int written = 0;
    auto emit = [&](const std::string& name, const Layout& l) {
        save_layout(l, out / (name + ".json"));
        std::cout << name << ": " << l.terminals.size() << " terminals\n";
        ++written;
    };

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(grammars))
        if (e.path().extension() == ".grammar") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        const Grammar g = load_grammar(p);
        const auto [w, h] = *g.source_size;
        emit(p.stem().string(), derive(g, w, h).layout);
    }

    const std::vector<std::string> ab{"transparent", "A", "B", "C", "D"};
    emit("row_abab", row(ab, {{1000, 1}, {2000, 2}, {1000, 1}, {2000, 2}}, Axis::x, 1000));
    emit("row_ababa", row(ab, {{1000, 1}, {2000, 2}, {1000, 1}, {2000, 2}, {1000, 1}}, Axis::x, 1000));
    emit("row_abcba", row(ab, {{1000, 1}, {1500, 2}, {500, 3}, {1500, 2}, {1000, 1}}, Axis::x, 1000));
    emit("row_abcdabc", row(ab, {{1000, 1}, {1000, 2}, {1000, 3}, {2000, 4}, {1000, 1}, {1000, 2}, {1000, 3}},
                            Axis::x, 1000));
    emit("col_abab", row(ab, {{500, 1}, {1500, 2}, {500, 1}, {1500, 2}}, Axis::y, 2000));
    emit("single", row(ab, {{3000, 1}}, Axis::x, 2000));
    emit("grid_uniform_3x3", grid(3, 3, 1000, {"transparent", "Cell"}, false));
    emit("grid_checker_4x4", grid(4, 4, 1000, {"transparent", "Black", "White"}, true));
    emit("random_1", random_guillotine(1, 6000, 4000, 4));
    emit("random_2", random_guillotine(2, 5000, 5000, 5));
    emit("random_3", random_guillotine(3, 8000, 3000, 5));
    emit("random_4", random_guillotine(4, 4000, 6000, 6));
    std::cout << written << " layouts\n";
    return 0;
}
