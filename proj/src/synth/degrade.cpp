// src/synth/degrade.cpp
#include <cmath>

#include "ariadne/rng.hpp"
#include "ariadne/synth_angio.hpp"
#include "ariadne/topology.hpp"
#include "ariadne/vessel_geometry.hpp"

namespace ariadne {
namespace {

constexpr int kAttempts = 256;

BinaryMask fragment(const BinaryMask& mask, int gap, int n_cuts, Rng& rng) {
    const auto skeleton = prune_spurs(skeletonize(mask), 5);
    const auto field = distance_transform(mask);
    const auto paths = extract_paths(skeleton);
    struct Site {
        std::size_t path;
        int index;
    };
    std::vector<Site> sites;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const int n = static_cast<int>(paths[p].size());
        if (n < 2 * gap + 5) continue;
        for (int i = 2; i <= n - 3; ++i) sites.push_back({p, i});
    }
    if (sites.empty()) throw DataError("degrade: mask too small to cut");

    BinaryMask out = mask;
    int components = betti0(out);
    for (int cut = 0; cut < n_cuts; ++cut) {
        bool done = false;
        for (int attempt = 0; attempt < kAttempts && !done; ++attempt) {
            const Site s = sites[rng.below(sites.size())];
            const auto& pts = paths[s.path].points;
            const Pixel p = pts[s.index];
            double tx = pts[s.index + 2].x - pts[s.index - 2].x, ty = pts[s.index + 2].y - pts[s.index - 2].y;
            const double norm = std::hypot(tx, ty);
            tx /= norm;
            ty /= norm;
            const double lateral = field.at(p.x, p.y) + 2.0;
            // Band width in the tangent direction. Scaling by |tx| + |ty| makes
            // it gap_px pixel steps thick along any direction, which is also
            // the least width an 8-connected path cannot step across.
            const double band = gap * (std::abs(tx) + std::abs(ty));
            const int reach = static_cast<int>(std::ceil(lateral + band));
            std::vector<Pixel> removed;
            for (int y = std::max(0, p.y - reach); y <= std::min(out.height() - 1, p.y + reach); ++y)
                for (int x = std::max(0, p.x - reach); x <= std::min(out.width() - 1, p.x + reach); ++x) {
                    if (!out.test(x, y)) continue;
                    const double along = (x - p.x) * tx + (y - p.y) * ty;
                    const double across = -(x - p.x) * ty + (y - p.y) * tx;
                    if (along >= -band / 2 && along < band / 2 && std::abs(across) <= lateral) removed.push_back({x, y});
                }
            for (auto q : removed) out.set(q.x, q.y, false);
            const int after = betti0(out);
            if (after > components) {
                components = after;
                done = true;
            } else {
                for (auto q : removed) out.set(q.x, q.y, true);
            }
        }
        if (!done) throw DataError("degrade: no cut site splits the mask (cut " + std::to_string(cut + 1) + ")");
    }
    return out;
}

BinaryMask over_dilate(const BinaryMask& mask, int px) {
    const auto d = distance_to_set(mask);
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = d[i] <= px ? 1 : 0;
    return out;
}

// Disks placed so that no blob pixel is 8-adjacent to the mask or another blob.
BinaryMask spurious_blobs(const BinaryMask& mask, int n, Rng& rng) {
    BinaryMask out = mask;
    for (int k = 0; k < n; ++k) {
        const auto d = distance_to_set(out);
        bool placed = false;
        for (int attempt = 0; attempt < 4 * kAttempts && !placed; ++attempt) {
            const double rho = rng.uniform(2.0, 4.0);
            const int m = static_cast<int>(std::ceil(rho));
            if (out.width() <= 2 * m || out.height() <= 2 * m) break;
            const int cx = rng.uniform_int(m, out.width() - 1 - m), cy = rng.uniform_int(m, out.height() - 1 - m);
            std::vector<Pixel> disk;
            bool clear = true;
            for (int y = cy - m; y <= cy + m && clear; ++y)
                for (int x = cx - m; x <= cx + m; ++x) {
                    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > rho * rho) continue;
                    if (d.at(x, y) < 2.0) {
                        clear = false;
                        break;
                    }
                    disk.push_back({x, y});
                }
            if (!clear) continue;
            for (auto q : disk) out.set(q.x, q.y);
            placed = true;
        }
        if (!placed) throw DataError("degrade: no free room for spurious blob " + std::to_string(k + 1));
    }
    return out;
}

}  // namespace

DegradeSpec DegradeSpec::fragment(int gap_px, int n_cuts, std::uint64_t seed) {
    DegradeSpec s;
    s.mode = Mode::Fragment;
    s.gap_px = gap_px;
    s.n_cuts = n_cuts;
    s.seed = seed;
    return s;
}

DegradeSpec DegradeSpec::over_dilate(int px, std::uint64_t seed) {
    DegradeSpec s;
    s.mode = Mode::OverDilate;
    s.dilate_px = px;
    s.seed = seed;
    return s;
}

DegradeSpec DegradeSpec::spurious_blob(int n, std::uint64_t seed) {
    DegradeSpec s;
    s.mode = Mode::SpuriousBlob;
    s.n_blobs = n;
    s.seed = seed;
    return s;
}

BinaryMask degrade(const BinaryMask& mask, const DegradeSpec& spec) {
    if (mask.count() == 0) throw DataError("degrade: mask is empty");
    Rng rng(derive_seed(spec.seed, "synth.degrade"));
    switch (spec.mode) {
        case DegradeSpec::Mode::None:
            return mask;
        case DegradeSpec::Mode::Fragment:
            if (spec.gap_px < 1 || spec.n_cuts < 1) throw ConfigError("degrade: need gap_px >= 1 and n_cuts >= 1");
            return fragment(mask, spec.gap_px, spec.n_cuts, rng);
        case DegradeSpec::Mode::OverDilate:
            if (spec.dilate_px < 1) throw ConfigError("degrade: dilation must be >= 1 px");
            return over_dilate(mask, spec.dilate_px);
        case DegradeSpec::Mode::SpuriousBlob:
            if (spec.n_blobs < 1) throw ConfigError("degrade: need at least one blob");
            return spurious_blobs(mask, spec.n_blobs, rng);
    }
    return mask;
}

}  // namespace ariadne
