// src/geometry/paths.cpp
#include <cmath>

#include "ariadne/vessel_geometry.hpp"

namespace ariadne {
namespace {

constexpr int kDirs[8][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

// m-adjacent neighbors of a skeleton pixel.
std::vector<Pixel> m_neighbors(const BinaryMask& sk, Pixel p) {
    std::vector<Pixel> out;
    for (const auto& d : kDirs) {
        const int nx = p.x + d[0], ny = p.y + d[1];
        if (!sk.test_or_background(nx, ny)) continue;
        if (d[0] != 0 && d[1] != 0) {
            if (sk.test_or_background(p.x + d[0], p.y) || sk.test_or_background(p.x, p.y + d[1])) continue;
        }
        out.push_back({nx, ny});
    }
    return out;
}

}  // namespace

CenterlinePath CenterlinePath::from_points(std::vector<Pixel> points) {
    CenterlinePath path;
    path.arc.reserve(points.size());
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) {
            const int dx = std::abs(points[i].x - points[i - 1].x);
            const int dy = std::abs(points[i].y - points[i - 1].y);
            if (dx > 1 || dy > 1 || dx + dy == 0) throw DataError("centerline points are not 8-adjacent");
            s += (dx + dy == 2) ? std::sqrt(2.0) : 1.0;
        }
        path.arc.push_back(s);
    }
    path.points = std::move(points);
    return path;
}

std::vector<CenterlinePath> extract_paths(const BinaryMask& skeleton) {
    const int w = skeleton.width();
    const int h = skeleton.height();
    Grid<int> degree(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (skeleton.test(x, y)) degree.at(x, y) = static_cast<int>(m_neighbors(skeleton, {x, y}).size());
    auto is_junction = [&](Pixel p) { return degree.at(p.x, p.y) >= 3; };

    std::vector<char> visited(skeleton.size(), 0);
    std::vector<CenterlinePath> paths;

    // Walks from `start` through `first` until a junction, an endpoint or a
    // revisit. Junctions are included as the final point.
    auto walk = [&](Pixel start, Pixel first) {
        std::vector<Pixel> out;
        Pixel prev = start, cur = first;
        for (;;) {
            if (is_junction(cur)) {
                out.push_back(cur);
                break;
            }
            if (visited[skeleton.index(cur.x, cur.y)]) break;
            visited[skeleton.index(cur.x, cur.y)] = 1;
            out.push_back(cur);
            const auto next = m_neighbors(skeleton, cur);
            const Pixel* step = nullptr;
            for (const auto& n : next)
                if (n != prev) {
                    step = &n;
                    break;
                }
            if (step == nullptr) break;
            prev = cur;
            cur = *step;
        }
        return out;
    };

    auto trace_from = [&](Pixel p) {
        visited[skeleton.index(p.x, p.y)] = 1;
        const auto nbrs = m_neighbors(skeleton, p);
        std::vector<Pixel> back, fwd;
        if (!nbrs.empty()) fwd = walk(p, nbrs[0]);
        // A loop closes on the start pixel; the second direction is then empty.
        if (nbrs.size() > 1) back = walk(p, nbrs[1]);
        std::vector<Pixel> pts(back.rbegin(), back.rend());
        pts.push_back(p);
        pts.insert(pts.end(), fwd.begin(), fwd.end());
        if (pts.size() >= 2) paths.push_back(CenterlinePath::from_points(std::move(pts)));
    };

    // Endpoints first so open branches run end-to-end from a tip.
    for (int pass = 0; pass < 2; ++pass)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!skeleton.test(x, y) || visited[skeleton.index(x, y)] || is_junction({x, y})) continue;
                const int d = degree.at(x, y);
                if (pass == 0 && d != 1) continue;
                if (d == 0) continue;
                trace_from({x, y});
            }

    // Junction pixels joined directly to each other.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Pixel p{x, y};
            if (!skeleton.test(x, y) || !is_junction(p)) continue;
            for (const auto& n : m_neighbors(skeleton, p))
                if (is_junction(n) && skeleton.index(n.x, n.y) > skeleton.index(x, y))
                    paths.push_back(CenterlinePath::from_points({p, n}));
        }
    return paths;
}

BinaryMask prune_spurs(const BinaryMask& skeleton, int max_length) {
    BinaryMask out = skeleton;
    if (max_length <= 0) return out;
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<Pixel> doomed;
        for (const auto& tip : out.foreground()) {
            if (m_neighbors(out, tip).size() != 1) continue;
            std::vector<Pixel> run{tip};
            Pixel prev = tip, cur = m_neighbors(out, tip)[0];
            bool reached_junction = false;
            while (static_cast<int>(run.size()) <= max_length) {
                const auto next = m_neighbors(out, cur);
                if (next.size() >= 3) {
                    reached_junction = true;
                    break;
                }
                if (next.size() == 1) break;  // the whole component is a short line
                run.push_back(cur);
                const Pixel step = next[0] == prev ? next[1] : next[0];
                prev = cur;
                cur = step;
            }
            if (reached_junction) doomed.insert(doomed.end(), run.begin(), run.end());
        }
        for (auto q : doomed) {
            if (out.test(q.x, q.y)) changed = true;
            out.set(q.x, q.y, false);
        }
    }
    return out;
}

}  // namespace ariadne
