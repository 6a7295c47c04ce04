// src/synth/generator.cpp
// Branching tube trees drawn by random walks. Centerlines are sampled at unit
// steps in continuous pixel space (pixel centers at +0.5), radii are known per
// sample, and the mask is rendered analytically from the tapered capsules.
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ariadne/json_fields.hpp"
#include "ariadne/parallel.hpp"
#include "ariadne/rng.hpp"
#include "ariadne/synth_angio.hpp"
#include "ariadne/topology.hpp"

namespace ariadne {
namespace {

struct Branch {
    std::vector<Point2> pts;
    std::vector<double> r;
    std::vector<int> spawns;  // sample indices where children leave
    int level = 0;
    bool crossing = false;
    double planned = 0.0;
};

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Pixel pixel_of(Point2 p) { return {static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))}; }

class TreeBuilder {
public:
    TreeBuilder(const SynthConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

    bool inside(Point2 p, double r) const {
        const double m = r + 3.0;
        return p.x >= m && p.y >= m && p.x <= cfg_.width - m && p.y <= cfg_.height - m;
    }

    // Unit-step random walk whose heading drifts smoothly around the initial
    // direction. With `steer` the walk bends toward the canvas center when it
    // nears the frame instead of leaving it.
    Branch walk(Point2 start, double heading, double length, double r0, double r1, bool steer) {
        Branch b;
        b.planned = length;
        b.pts.push_back(start);
        b.r.push_back(r0);
        double omega = 0.0;
        double target = heading;
        const Point2 center{cfg_.width / 2.0, cfg_.height / 2.0};
        const int steps = static_cast<int>(length);
        for (int i = 1; i <= steps; ++i) {
            const double r = r0 + (r1 - r0) * i / length;
            const Point2 p = b.pts.back();
            if (steer && !inside(p, r + 12.0)) target = std::atan2(center.y - p.y, center.x - p.x);
            omega = 0.9 * omega + rng_.normal(0.0, 0.012);
            heading += omega + 0.04 * std::remainder(target - heading, 2 * std::numbers::pi);
            Point2 next{p.x + std::cos(heading), p.y + std::sin(heading)};
            if (!inside(next, r)) {
                if (!steer) break;
                const double to_center = std::atan2(center.y - p.y, center.x - p.x);
                bool ok = false;
                for (int tries = 0; tries < 8 && !ok; ++tries) {
                    heading += std::clamp(std::remainder(to_center - heading, 2 * std::numbers::pi), -0.25, 0.25);
                    omega = 0.0;
                    next = {p.x + std::cos(heading), p.y + std::sin(heading)};
                    ok = inside(next, r);
                }
                if (!ok) break;
            }
            b.pts.push_back(next);
            b.r.push_back(r);
        }
        return b;
    }

    std::vector<Branch> build() {
        const double side = std::min(cfg_.width, cfg_.height);
        std::vector<Branch> tree;
        for (int attempt = 0; attempt < 32 && tree.empty(); ++attempt) {
            const double r0 = std::max(cfg_.radius_min, cfg_.radius_max * rng_.uniform(0.8, 1.0));
            const double r1 = std::max(cfg_.radius_min, 0.6 * r0);
            const int edge = static_cast<int>(rng_.below(4));
            const double m = r0 + 4.0, f = rng_.uniform(0.3, 0.7);
            Point2 start;
            double heading = 0.0;
            switch (edge) {
                case 0: start = {m, f * cfg_.height}; heading = 0.0; break;
                case 1: start = {cfg_.width - m, f * cfg_.height}; heading = std::numbers::pi; break;
                case 2: start = {f * cfg_.width, m}; heading = std::numbers::pi / 2; break;
                default: start = {f * cfg_.width, cfg_.height - m}; heading = -std::numbers::pi / 2; break;
            }
            heading += rng_.uniform(-0.4, 0.4);
            Branch trunk = walk(start, heading, 0.85 * side, r0, r1, true);
            if (trunk.pts.size() >= 0.4 * side) tree.push_back(std::move(trunk));
        }
        if (tree.empty()) throw DataError("synth: canvas too small to draw the vessel trunk");

        for (std::size_t bi = 0; bi < tree.size(); ++bi) {
            if (tree[bi].level >= cfg_.depth) continue;
            const int n = static_cast<int>(tree[bi].pts.size());
            double sign = rng_.uniform() < 0.5 ? -1.0 : 1.0;
            for (int k = 0; k < cfg_.branches; ++k) {
                const double frac = (k + 1.0) / (cfg_.branches + 1.0) + rng_.uniform(-0.1, 0.1);
                const int at = std::clamp(static_cast<int>(frac * (n - 1)), 1, n - 2);
                const auto& parent = tree[bi];
                const Point2 a = parent.pts[at - 1], c = parent.pts[at + 1];
                const double tangent = std::atan2(c.y - a.y, c.x - a.x);
                const double heading = tangent + sign * rng_.uniform(0.6, 1.1);
                sign = -sign;
                const double r0 = std::max(cfg_.radius_min, 0.72 * parent.r[at]);
                const double r1 = std::max(cfg_.radius_min, 0.55 * r0);
                Branch child = walk(parent.pts[at], heading, 0.6 * parent.planned, r0, r1, false);
                if (child.pts.size() < 15) continue;
                child.level = parent.level + 1;
                tree[bi].spawns.push_back(at);
                tree.push_back(std::move(child));
            }
        }
        return tree;
    }

private:
    const SynthConfig& cfg_;
    Rng& rng_;
};

// Straight vessel passing over a random point of the tree at a steep angle.
Branch make_crossing(const SynthConfig& cfg, const std::vector<Branch>& tree, Rng& rng, Point2& where) {
    TreeBuilder bounds(cfg, rng);
    std::vector<const Branch*> hosts;
    for (const auto& b : tree)
        if (!b.crossing && b.level <= 1 && b.pts.size() >= 20) hosts.push_back(&b);
    for (int attempt = 0; attempt < 256 && !hosts.empty(); ++attempt) {
        const auto& host = *hosts[rng.below(hosts.size())];
        const int n = static_cast<int>(host.pts.size());
        const int at = static_cast<int>(rng.uniform(0.2, 0.8) * (n - 1));
        const Point2 a = host.pts[at - 1], c = host.pts[at + 1];
        const double angle = std::atan2(c.y - a.y, c.x - a.x) + (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(1.1, 1.57);
        const double r = rng.uniform(std::max(cfg.radius_min, 2.0), std::max(std::max(cfg.radius_min, 2.0), 0.75 * cfg.radius_max));
        const double half = rng.uniform(35.0, 60.0);
        const Point2 mid = host.pts[at];
        const Point2 dir{std::cos(angle), std::sin(angle)};
        int lo = 0, hi = 0;
        while (lo < half && bounds.inside({mid.x - (lo + 1) * dir.x, mid.y - (lo + 1) * dir.y}, r)) ++lo;
        while (hi < half && bounds.inside({mid.x + (hi + 1) * dir.x, mid.y + (hi + 1) * dir.y}, r)) ++hi;
        if (lo < host.r[at] + r + 10 || hi < host.r[at] + r + 10) continue;
        Branch b;
        b.crossing = true;
        b.level = -1;
        for (int i = -lo; i <= hi; ++i) {
            b.pts.push_back({mid.x + i * dir.x, mid.y + i * dir.y});
            b.r.push_back(r);
        }
        b.planned = lo + hi;
        where = mid;
        return b;
    }
    throw DataError("synth: no room for a crossing vessel");
}

struct Site {
    std::size_t branch;
    int index;
};

// Smooth dip r <- r * (1 - sev * exp(-(s - s0)^2 / 2w^2)) on a mid-branch
// sample with clear surroundings, so the lesion is the only narrowing there.
Stenosis plant_stenosis(const SynthConfig& cfg, std::vector<Branch>& tree, std::vector<Site>& planted, Rng& rng) {
    auto width_of = [](double r) { return std::clamp(1.2 * r, 4.0, 8.0); };
    std::vector<Site> sites;
    for (std::size_t bi = 0; bi < tree.size(); ++bi) {
        const auto& b = tree[bi];
        if (b.crossing) continue;
        const int n = static_cast<int>(b.pts.size());
        for (int i = 0; i < n; ++i) {
            const double r = b.r[i];
            if (r < cfg.stenosis_min_radius) continue;
            const double w = width_of(r);
            const int guard = static_cast<int>(std::ceil(3 * w + 4));
            if (i < guard || i > n - 1 - guard) continue;
            bool ok = std::all_of(b.spawns.begin(), b.spawns.end(),
                                  [&](int s) { return std::abs(s - i) >= 3 * w + r + 2; });
            for (const auto& s : planted)
                ok = ok && !(s.branch == bi && std::abs(s.index - i) < 6 * w);
            for (std::size_t bj = 0; bj < tree.size() && ok; ++bj) {
                const auto& o = tree[bj];
                for (std::size_t j = 0; j < o.pts.size() && ok; ++j) {
                    if (bj == bi && std::abs(static_cast<int>(j) - i) <= 3 * w) continue;
                    ok = dist(o.pts[j], b.pts[i]) >= r + o.r[j] + 4.0;
                }
            }
            if (ok) sites.push_back({bi, i});
        }
    }
    if (sites.empty()) throw DataError("synth: no clear segment left for stenosis " + std::to_string(planted.size() + 1));
    const Site site = sites[rng.below(sites.size())];
    auto& b = tree[site.branch];
    const double base = b.r[site.index];
    const double w = width_of(base);
    const double sev = rng.uniform(cfg.severity_min, cfg.severity_max);
    for (std::size_t j = 0; j < b.r.size(); ++j) {
        const double d = static_cast<double>(j) - site.index;
        b.r[j] *= 1.0 - sev * std::exp(-d * d / (2 * w * w));
    }
    planted.push_back(site);
    return {pixel_of(b.pts[site.index]), sev, base};
}

// Per-pixel count of branches whose tapered capsule covers the pixel center.
// Render radius is r - 0.25: the distance transform (center to nearest
// background center) then reads back r at the ridge to within a third of a
// pixel on straight segments.
Grid<int> render_coverage(const SynthConfig& cfg, const std::vector<Branch>& tree) {
    Grid<int> count(cfg.width, cfg.height, 0);
    std::vector<std::vector<std::uint8_t>> hit(tree.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(tree.size()), [&](std::ptrdiff_t bi) {
        const auto& b = tree[bi];
        auto& h = hit[bi];
        h.assign(count.size(), 0);
        for (std::size_t j = 0; j + 1 < b.pts.size(); ++j) {
            const Point2 p = b.pts[j], q = b.pts[j + 1];
            const double rp = std::max(b.r[j] - 0.25, 0.5), rq = std::max(b.r[j + 1] - 0.25, 0.5);
            const double reach = std::max(rp, rq) + 1.0;
            const int x0 = std::max(0, static_cast<int>(std::floor(std::min(p.x, q.x) - reach)));
            const int x1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(std::max(p.x, q.x) + reach)));
            const int y0 = std::max(0, static_cast<int>(std::floor(std::min(p.y, q.y) - reach)));
            const int y1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(std::max(p.y, q.y) + reach)));
            const double vx = q.x - p.x, vy = q.y - p.y, vv = vx * vx + vy * vy;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double cx = x + 0.5 - p.x, cy = y + 0.5 - p.y;
                    const double t = vv > 0 ? std::clamp((cx * vx + cy * vy) / vv, 0.0, 1.0) : 0.0;
                    const double dx = cx - t * vx, dy = cy - t * vy;
                    const double rad = rp + t * (rq - rp);
                    if (dx * dx + dy * dy <= rad * rad) h[count.index(x, y)] = 1;
                }
        }
    });
    for (const auto& h : hit)
        for (std::size_t i = 0; i < h.size(); ++i) count[i] += h[i];
    return count;
}

}  // namespace

void validate(const SynthConfig& c) {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("synth: ") + what);
    };
    need(c.width >= 32 && c.height >= 32 && c.width <= 8192 && c.height <= 8192, "width/height must be in [32, 8192]");
    need(c.depth >= 0 && c.depth <= 6, "depth must be in [0, 6]");
    need(c.branches >= 0 && c.branches <= 6, "branches must be in [0, 6]");
    need(c.radius_min > 0 && c.radius_min <= c.radius_max, "need 0 < radius_min <= radius_max");
    need(c.n_stenoses >= 0 && c.n_crossings >= 0, "counts must be non-negative");
    need(c.severity_min > 0 && c.severity_min <= c.severity_max && c.severity_max < 1, "need 0 < severity_min <= severity_max < 1");
    need(c.stenosis_min_radius > 0, "stenosis_min_radius must be positive");
    need(c.noise_min >= 0 && c.noise_min <= c.noise_max && c.noise_max <= 1, "need 0 <= noise_min <= noise_max <= 1");
    need(c.contrast > 0 && c.contrast <= 1, "contrast must be in (0, 1]");
    need(c.background_gradient >= 0 && c.background_gradient <= 0.5, "background_gradient must be in [0, 0.5]");
    need(std::min(c.width, c.height) >= 2 * (c.radius_max + 4) + 40, "canvas too small for radius_max");
}

nlohmann::json to_json(const SynthConfig& c) {
    return {{"width", c.width},
            {"height", c.height},
            {"depth", c.depth},
            {"branches", c.branches},
            {"radius_min", c.radius_min},
            {"radius_max", c.radius_max},
            {"n_stenoses", c.n_stenoses},
            {"severity_min", c.severity_min},
            {"severity_max", c.severity_max},
            {"stenosis_min_radius", c.stenosis_min_radius},
            {"n_crossings", c.n_crossings},
            {"noise_min", c.noise_min},
            {"noise_max", c.noise_max},
            {"contrast", c.contrast},
            {"background_gradient", c.background_gradient}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    FieldReader(j, "synth")
        .read("width", c.width)
        .read("height", c.height)
        .read("depth", c.depth)
        .read("branches", c.branches)
        .read("radius_min", c.radius_min)
        .read("radius_max", c.radius_max)
        .read("n_stenoses", c.n_stenoses)
        .read("severity_min", c.severity_min)
        .read("severity_max", c.severity_max)
        .read("stenosis_min_radius", c.stenosis_min_radius)
        .read("n_crossings", c.n_crossings)
        .read("noise_min", c.noise_min)
        .read("noise_max", c.noise_max)
        .read("contrast", c.contrast)
        .read("background_gradient", c.background_gradient)
        .finish();
    validate(c);
    return c;
}

std::string to_string(ArtifactKind kind) { return kind == ArtifactKind::Crossing ? "crossing" : "bifurcation"; }

SyntheticCase generate_case(const SynthConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    Rng tree_rng(derive_seed(seed, "synth.tree"));
    Rng cross_rng(derive_seed(seed, "synth.crossing"));
    Rng lesion_rng(derive_seed(seed, "synth.stenosis"));
    Rng image_rng(derive_seed(seed, "synth.image"));

    SyntheticCase out;
    out.seed = seed;
    auto tree = TreeBuilder(cfg, tree_rng).build();
    for (const auto& b : tree)
        for (int s : b.spawns) out.artifacts.push_back({ArtifactKind::Bifurcation, pixel_of(b.pts[s])});

    for (int k = 0; k < cfg.n_crossings; ++k) {
        Point2 where;
        Branch crossing = make_crossing(cfg, tree, cross_rng, where);
        tree.push_back(std::move(crossing));
        out.artifacts.push_back({ArtifactKind::Crossing, pixel_of(where)});
    }

    std::vector<Site> planted;
    for (int k = 0; k < cfg.n_stenoses; ++k) out.stenoses.push_back(plant_stenosis(cfg, tree, planted, lesion_rng));

    const auto coverage = render_coverage(cfg, tree);
    out.gt_mask = BinaryMask(cfg.width, cfg.height);
    for (std::size_t i = 0; i < coverage.size(); ++i) out.gt_mask[i] = coverage[i] > 0 ? 1 : 0;
    if (betti0(out.gt_mask) != 1) throw DataError("synth: rendered tree is not connected (seed " + std::to_string(seed) + ")");
    // The recorded centroid is the ridge pixel of the narrowing: among pixels
    // whose centers lie within one pixel of the axis point, the one deepest
    // inside the mask.
    const auto field = distance_transform(out.gt_mask);
    for (std::size_t k = 0; k < out.stenoses.size(); ++k) {
        const Point2 axis = tree[planted[k].branch].pts[planted[k].index];
        auto& c = out.stenoses[k].centroid;
        const Pixel base = c;
        double best = -1.0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = base.x + dx, y = base.y + dy;
                if (!out.gt_mask.test_or_background(x, y)) continue;
                if (std::hypot(x + 0.5 - axis.x, y + 0.5 - axis.y) > 1.0) continue;
                if (field.at(x, y) > best) {
                    best = field.at(x, y);
                    c = {x, y};
                }
            }
        if (best <= 0.0) throw DataError("synth: stenosis centroid off the mask");
    }

    // Dark vessels on a bright, tilted background; overlaps read darker.
    const double noise = image_rng.uniform(cfg.noise_min, cfg.noise_max);
    const double phi = image_rng.uniform(0.0, 2 * std::numbers::pi);
    std::vector<double> values(coverage.size());
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) {
            const double u = (x + 0.5) / cfg.width - 0.5, v = (y + 0.5) / cfg.height - 0.5;
            double I = 0.7 + cfg.background_gradient * (u * std::cos(phi) + v * std::sin(phi));
            const int c = coverage.at(x, y);
            if (c > 0) I -= cfg.contrast * std::min(1.6, 1.0 + 0.6 * (c - 1));
            I += image_rng.uniform(-noise, noise);
            values[coverage.index(x, y)] = std::lround(std::clamp(I, 0.0, 1.0) * 255.0) / 255.0;
        }
    out.image = GrayImage(cfg.width, cfg.height, std::move(values));
    return out;
}

}  // namespace ariadne
