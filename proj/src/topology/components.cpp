// src/topology/components.cpp
// Two-pass union-find labeling.
#include <numeric>

#include "ariadne/topology.hpp"

namespace ariadne {
namespace {

class DisjointSet {
public:
    int make() {
        parent_.push_back(static_cast<int>(parent_.size()));
        return parent_.back();
    }
    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<int> parent_;
};

}  // namespace

LabeledComponents connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width();
    const int h = mask.height();
    Grid<int> provisional(w, h, -1);
    DisjointSet sets;

    // Already-visited neighbors in raster order.
    static constexpr int kPrev4[][2] = {{-1, 0}, {0, -1}};
    static constexpr int kPrev8[][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    const bool eight = connectivity == Connectivity::Eight;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.test(x, y)) continue;
            int label = -1;
            auto visit = [&](int dx, int dy) {
                const int nx = x + dx, ny = y + dy;
                if (!mask.in_bounds(nx, ny)) return;
                const int other = provisional.at(nx, ny);
                if (other < 0) return;
                if (label < 0) label = other;
                else sets.unite(label, other);
            };
            if (eight)
                for (auto& d : kPrev8) visit(d[0], d[1]);
            else
                for (auto& d : kPrev4) visit(d[0], d[1]);
            provisional.at(x, y) = label >= 0 ? label : sets.make();
        }
    }

    LabeledComponents out{Grid<int>(w, h, 0), 0};
    std::vector<int> final_label;
    for (std::size_t i = 0; i < provisional.size(); ++i) {
        if (provisional[i] < 0) continue;
        const int root = sets.find(provisional[i]);
        if (static_cast<std::size_t>(root) >= final_label.size()) final_label.resize(root + 1, 0);
        if (final_label[root] == 0) final_label[root] = ++out.count;
        out.labels[i] = final_label[root];
    }
    return out;
}

int betti0(const BinaryMask& mask, Connectivity connectivity) {
    return connected_components(mask, connectivity).count;
}

std::vector<Pixel> boundary_pixels(const BinaryMask& mask) {
    std::vector<Pixel> out;
    const BinaryMask b = boundary_mask(mask);
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x)
            if (b.test(x, y)) out.push_back({x, y});
    return out;
}

}  // namespace ariadne
