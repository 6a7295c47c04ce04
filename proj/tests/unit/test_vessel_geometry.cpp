#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ariadne/vessel_geometry.hpp"
#include "oracles.hpp"

using namespace ariadne;

namespace {

CenterlinePath straight_path(int n) {
    std::vector<Pixel> pts;
    for (int i = 0; i < n; ++i) pts.push_back({i, 0});
    return CenterlinePath::from_points(pts);
}

BinaryMask draw(int w, int h, const std::vector<Pixel>& px) {
    BinaryMask m(w, h);
    for (auto p : px) m.set(p.x, p.y);
    return m;
}

bool contains(const CenterlinePath& p, Pixel q) {
    return std::find(p.points.begin(), p.points.end(), q) != p.points.end();
}

// Predicate scan plus "smallest r in its window" test, written without the
// greedy pass the library uses. Equivalent when surviving dips are isolated.
std::vector<int> brute_candidates(const RadiusProfile& p, double k, double theta, int radius) {
    const double thr = p.mean - k * p.stddev;
    auto hit = [&](int i) { return p.r[i] < thr && p.curv[i] > theta; };
    std::vector<int> out;
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
        if (!hit(i)) continue;
        bool best = true;
        for (int j = std::max(0, i - radius); j <= std::min(n - 1, i + radius); ++j)
            if (j != i && hit(j) && (p.r[j] < p.r[i] || (p.r[j] == p.r[i] && j < i))) best = false;
        if (best) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_CASE("paths: straight line") {
    std::vector<Pixel> px;
    for (int x = 2; x < 12; ++x) px.push_back({x, 3});
    auto paths = extract_paths(draw(16, 8, px));
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].size() == 10);
    CHECK(paths[0].length() == doctest::Approx(9.0));
}

TEST_CASE("paths: Y shape splits at the junction") {
    const Pixel j{10, 10};
    std::vector<Pixel> px{j};
    for (int i = 1; i <= 6; ++i) {
        px.push_back({10, 10 - i});
        px.push_back({10 - i, 10 + i});
        px.push_back({10 + i, 10 + i});
    }
    auto paths = extract_paths(draw(24, 24, px));
    REQUIRE(paths.size() == 3);
    for (const auto& p : paths) {
        CHECK(p.size() == 7);
        CHECK(contains(p, j));
        CHECK((p.points.front() == j || p.points.back() == j));
    }
}

TEST_CASE("paths: disjoint lines, empty skeleton, loop") {
    std::vector<Pixel> px;
    for (int x = 0; x < 8; ++x) px.push_back({x, 1});
    for (int y = 3; y < 9; ++y) px.push_back({5, y});
    CHECK(extract_paths(draw(10, 10, px)).size() == 2);
    CHECK(extract_paths(BinaryMask(10, 10)).empty());

    // 4-connected square ring
    std::vector<Pixel> ring;
    for (int i = 2; i <= 6; ++i) {
        ring.push_back({i, 2});
        ring.push_back({i, 6});
    }
    for (int i = 3; i <= 5; ++i) {
        ring.push_back({2, i});
        ring.push_back({6, i});
    }
    auto loops = extract_paths(draw(9, 9, ring));
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].size() == ring.size());
}

TEST_CASE("paths: every skeleton pixel is covered and paths are 8-adjacent") {
    Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        auto mask = oracle::random_tube_fixture(rng, 96, 96);
        auto sk = skeletonize(mask);
        auto paths = extract_paths(sk);
        std::set<Pixel> covered;
        for (const auto& p : paths) {
            CHECK(p.size() >= 2);
            for (std::size_t i = 1; i < p.size(); ++i) {
                CHECK(p.arc[i] > p.arc[i - 1]);
                CHECK(std::abs(p.points[i].x - p.points[i - 1].x) <= 1);
                CHECK(std::abs(p.points[i].y - p.points[i - 1].y) <= 1);
            }
            covered.insert(p.points.begin(), p.points.end());
        }
        // isolated single pixels are the only thing allowed to go missing
        for (auto q : sk.foreground()) {
            if (covered.count(q)) continue;
            int nb = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) nb += (dx || dy) && sk.test_or_background(q.x + dx, q.y + dy);
            CHECK(nb == 0);
        }
    }
}

TEST_CASE("prune_spurs") {
    // long line with a 3-pixel spur and a 12-pixel side branch
    std::vector<Pixel> px;
    for (int x = 2; x < 40; ++x) px.push_back({x, 10});
    for (int i = 1; i <= 3; ++i) px.push_back({10, 10 - i});
    for (int i = 1; i <= 12; ++i) px.push_back({25, 10 + i});
    const auto sk = draw(48, 30, px);
    const auto pruned = prune_spurs(sk, 5);
    CHECK(pruned.count() == sk.count() - 3);
    CHECK_FALSE(pruned.test(10, 9));
    CHECK(pruned.test(25, 22));
    CHECK(extract_paths(pruned).size() == 3);
    CHECK(prune_spurs(sk, 0) == sk);
    CHECK(prune_spurs(pruned, 5) == pruned);

    // a short isolated line has no junction and is kept whole
    const auto stub = draw(10, 10, {{2, 2}, {3, 2}, {4, 2}});
    CHECK(prune_spurs(stub, 5) == stub);

    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        auto sk2 = skeletonize(oracle::random_tube_fixture(rng, 96, 96));
        auto p2 = prune_spurs(sk2, 5);
        CHECK(betti0(p2) == betti0(sk2));
        for (std::size_t i = 0; i < p2.size(); ++i)
            if (p2[i]) CHECK(sk2[i]);
    }
}

TEST_CASE("from_points rejects gaps") {
    CHECK_THROWS_AS(CenterlinePath::from_points({{0, 0}, {2, 0}}), DataError);
    CHECK_THROWS_AS(CenterlinePath::from_points({{0, 0}, {0, 0}}), DataError);
    auto p = CenterlinePath::from_points({{0, 0}, {1, 1}, {2, 1}});
    CHECK(p.length() == doctest::Approx(1.0 + std::sqrt(2.0)));
}

TEST_CASE("profile: constant radius") {
    auto path = straight_path(30);
    auto p = build_profile(path, std::vector<double>(30, 4.0));
    CHECK(p.stddev == kSigmaFloor);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(std::abs(p.grad[i]) < 1e-9);
        CHECK(std::abs(p.curv[i]) < 1e-9);
        CHECK(std::abs(p.z[i]) < 1e-9);
    }
    CHECK(generate_candidates(p).candidates.empty());
}

TEST_CASE("profile: linear radius has exact gradient") {
    auto path = straight_path(40);
    std::vector<double> r;
    for (int i = 0; i < 40; ++i) r.push_back(2.0 + 0.25 * i);
    auto p = build_profile(path, r, 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.grad[i] == doctest::Approx(0.25).epsilon(1e-12));
        if (i > 0 && i + 1 < p.size()) CHECK(std::abs(p.curv[i]) < 1e-12);
    }
    // window 5 keeps interior linearity
    auto q = build_profile(path, r, 5);
    for (std::size_t i = 3; i + 3 < q.size(); ++i) CHECK(q.grad[i] == doctest::Approx(0.25));
}

TEST_CASE("profile: nonuniform steps use the exact three-point stencil") {
    // staircase with diagonal steps; r = s^2 has d2r/ds2 == 2 exactly
    auto path = CenterlinePath::from_points({{0, 0}, {1, 0}, {2, 1}, {3, 1}, {4, 2}, {5, 3}, {6, 3}});
    std::vector<double> r;
    for (double s : path.arc) r.push_back(s * s);
    auto p = build_profile(path, r, 1);
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        CHECK(p.curv[i] == doctest::Approx(2.0));
        CHECK(p.grad[i] == doctest::Approx(2.0 * path.arc[i]));
    }
}

TEST_CASE("profile: planted Gaussian dip") {
    const double R = 5.0, A = 2.5, s0 = 30.3, w = 4.0;
    auto path = straight_path(64);
    std::vector<double> r;
    for (double s : path.arc) r.push_back(R - A * std::exp(-(s - s0) * (s - s0) / (2 * w * w)));
    for (int window : {1, 5}) {
        auto p = build_profile(path, r, window);
        const int at = static_cast<int>(std::lround(s0));
        CHECK(p.curv[at] > 0.0);
        const auto mn = std::min_element(p.r.begin(), p.r.end()) - p.r.begin();
        CHECK(std::abs(static_cast<double>(mn) - s0) <= 1.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(p.z[i] == doctest::Approx((p.r[i] - p.mean) / p.stddev));
    }
}

TEST_CASE("profile: errors") {
    CHECK_THROWS_AS(build_profile(straight_path(2), std::vector<double>{1, 1}), DataError);
    CHECK_THROWS_AS(build_profile(straight_path(5), std::vector<double>(5, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(build_profile(straight_path(5), std::vector<double>(4, 1.0)), ShapeError);
}

TEST_CASE("candidates: planted dip gives one candidate at the minimum") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 60 + static_cast<int>(rng.below(80));
        auto path = straight_path(n);
        std::vector<double> r(n);
        for (auto& v : r) v = 4.0 + rng.uniform(-0.15, 0.15);
        const int at = 10 + static_cast<int>(rng.below(n - 20));
        auto p0 = build_profile(path, r, 1);
        const double depth = 3.0 * std::max(p0.stddev, 0.1) + 1.0;
        for (int i = 0; i < n; ++i) r[i] -= depth * std::exp(-(i - at) * (i - at) / 8.0);
        auto p = build_profile(path, r, 5);

        auto cs = generate_candidates(p);
        REQUIRE(cs.candidates.size() == 1);
        const auto mn = std::min_element(p.r.begin(), p.r.end()) - p.r.begin();
        CHECK(cs.candidates[0].index == mn);
        CHECK(std::abs(cs.candidates[0].index - at) <= 1);

        auto brute = brute_candidates(p, 1.5, 0.0, 10);
        REQUIRE(brute.size() == 1);
        CHECK(brute[0] == cs.candidates[0].index);

        CHECK(generate_candidates(p, {10.0, 0.0, 10}).candidates.empty());
    }
}

TEST_CASE("candidates: predicate holds and suppression window is respected") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 20 + static_cast<int>(rng.below(200));
        std::vector<double> r(n);
        for (auto& v : r) v = rng.uniform(1.0, 6.0);
        auto p = build_profile(straight_path(n), r, 3);
        CandidateParams cp{rng.uniform(0.2, 2.0), rng.uniform(-0.5, 0.5), static_cast<int>(rng.below(12))};
        auto cs = generate_candidates(p, cp, 3);
        for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
            const auto& c = cs.candidates[i];
            CHECK(c.path_id == 3);
            CHECK(p.r[c.index] < p.mean - cp.k * p.stddev);
            CHECK(p.curv[c.index] > cp.theta_curv);
            CHECK(c.pixel == p.path.points[c.index]);
            if (i > 0) CHECK(c.index - cs.candidates[i - 1].index > cp.suppression_radius);
        }
        // every predicate hit is either kept or within the window of a kept one with r <= its own
        for (int i = 0; i < n; ++i) {
            if (!(p.r[i] < p.mean - cp.k * p.stddev && p.curv[i] > cp.theta_curv)) continue;
            bool explained = false;
            for (const auto& c : cs.candidates)
                explained = explained || (std::abs(c.index - i) <= cp.suppression_radius && p.r[c.index] <= p.r[i]);
            CHECK(explained);
        }
        CHECK(generate_candidates(p, {10.0, cp.theta_curv, cp.suppression_radius}).candidates.empty());
    }
}

TEST_CASE("analysis: translation equivariance") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto base = oracle::random_tube_fixture(rng, 80, 80);
        const int dx = 1 + static_cast<int>(rng.below(20)), dy = 1 + static_cast<int>(rng.below(20));
        BinaryMask big(120, 120), shifted(120, 120);
        for (auto q : base.foreground()) {
            big.set(q.x + 10, q.y + 10);
            shifted.set(q.x + 10 + dx, q.y + 10 + dy);
        }
        VesselAnalysisParams vp;
        vp.candidates.k = 0.8;
        auto a = analyze_vessels(big, vp);
        auto b = analyze_vessels(shifted, vp);
        REQUIRE(a.candidates.size() == b.candidates.size());
        for (std::size_t i = 0; i < a.candidates.size(); ++i) {
            CHECK(a.candidates[i].index == b.candidates[i].index);
            CHECK(a.candidates[i].pixel.x + dx == b.candidates[i].pixel.x);
            CHECK(a.candidates[i].pixel.y + dy == b.candidates[i].pixel.y);
        }
    }
}

TEST_CASE("analysis: tube with a narrowing") {
    // a straight tube of radius 5 pinched to radius 2 around x = 60
    BinaryMask m(128, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 128; ++x) {
            const double rad = 5.0 - 3.0 * std::exp(-(x - 60.0) * (x - 60.0) / (2 * 5.0 * 5.0));
            if (x >= 6 && x < 122 && std::abs(y + 0.5 - 20.0) <= rad) m.set(x, y);
        }
    auto a = analyze_vessels(m);
    REQUIRE(!a.candidates.empty());
    bool near = false;
    for (const auto& c : a.candidates) near = near || std::abs(c.pixel.x - 60) <= 3;
    CHECK(near);
    for (const auto& p : a.profiles) {
        CHECK(p.size() >= 10);
        for (const auto& q : p.path.points) CHECK(m.test(q.x, q.y));
    }
    std::ostringstream csv;
    write_profile_csv(a.profiles[0], csv);
    const std::string text = csv.str();
    CHECK(text.rfind("s,x,y,r,grad,curv,z\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(a.profiles[0].size() + 1));
}
