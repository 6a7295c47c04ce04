// src/topology/thinning.cpp
#include <array>
#include <cstdlib>

#include "ariadne/topology.hpp"
#include "exec.hpp"

namespace ariadne {
namespace detail {
namespace {

// Neighbors P2..P9, clockwise from north.
constexpr std::array<std::array<int, 2>, 8> kRing = {{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

bool deletable(const BinaryMask& img, int x, int y, int pass) {
    if (!img.test(x, y)) return false;
    std::array<int, 8> p{};
    int b = 0;
    for (int i = 0; i < 8; ++i) {
        p[i] = img.test_or_background(x + kRing[i][0], y + kRing[i][1]) ? 1 : 0;
        b += p[i];
    }
    // Lower bound 3 rather than 2 (Lu-Wang): a pixel with two adjacent
    // neighbors is the tip of a two-pixel-thick diagonal, and deleting it
    // would eat such lines from the end one subiteration at a time.
    if (b < 3 || b > 6) return false;
    int a = 0;
    for (int i = 0; i < 8; ++i)
        if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
    if (a != 1) return false;
    const int n = p[0], e = p[2], s = p[4], w = p[6];
    if (pass == 0) return n * e * s == 0 && e * s * w == 0;
    return n * e * w == 0 && n * s * w == 0;
}

// Simple-point test for 8-connected foreground: Yokoi's 8-connectivity number
// equals 1, and the pixel has at least three neighbors so tips stay put.
bool removable(const BinaryMask& img, int x, int y) {
    std::array<int, 8> c{};  // complements, ring order from north
    int b = 0;
    for (int i = 0; i < 8; ++i) {
        const int v = img.test_or_background(x + kRing[i][0], y + kRing[i][1]) ? 1 : 0;
        b += v;
        c[i] = 1 - v;
    }
    if (b < 3) return false;
    int n8 = 0;
    for (int k = 0; k < 8; k += 2) n8 += c[k] - c[k] * c[(k + 1) % 8] * c[(k + 2) % 8];
    return n8 == 1;
}

// Exactly two neighbors, adjacent to each other.
bool touching_prong(const BinaryMask& img, int x, int y) {
    Pixel nb[2];
    int b = 0;
    for (const auto& d : kRing)
        if (img.test_or_background(x + d[0], y + d[1])) {
            if (b == 2) return false;
            nb[b++] = {x + d[0], y + d[1]};
        }
    return b == 2 && std::abs(nb[0].x - nb[1].x) <= 1 && std::abs(nb[0].y - nb[1].y) <= 1;
}

bool interior(const BinaryMask& img, int x, int y) {
    if (!img.test(x, y)) return false;
    for (const auto& d : kRing)
        if (!img.test_or_background(x + d[0], y + d[1])) return false;
    return true;
}

void thin(BinaryMask& img, std::vector<std::uint8_t>& marks, Exec exec) {
    const int w = img.width();
    const int h = img.height();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            run_rows(exec, h, [&](std::ptrdiff_t yi) {
                const int y = static_cast<int>(yi);
                for (int x = 0; x < w; ++x) marks[img.index(x, y)] = deletable(img, x, y, pass) ? 1 : 0;
            });
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!marks[img.index(x, y)]) continue;
                    // Earlier commits in this subiteration may have made the
                    // pixel non-simple or a tip.
                    if (!removable(img, x, y)) continue;
                    img.set(x, y, false);
                    changed = true;
                }
            }
        }
    }
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask, Exec exec) {
    BinaryMask img = mask;
    std::vector<std::uint8_t> marks(img.size());
    for (;;) {
        thin(img, marks, exec);
        bool changed = false;
        // Thinning stalls on pixels whose whole 3x3 neighborhood is foreground
        // when every neighbor borders a hole. Removing such a pixel cannot
        // split a component (its neighbor ring stays connected).
        for (int y = 1; y + 1 < img.height(); ++y)
            for (int x = 1; x + 1 < img.width(); ++x)
                if (interior(img, x, y)) {
                    img.set(x, y, false);
                    changed = true;
                }
        // Two-pixel-thick diagonals are stable under the subiteration rules;
        // strip their simple pixels so the result is unit width.
        for (bool more = true; more;) {
            more = false;
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x)
                    if (img.test(x, y) && removable(img, x, y)) {
                        img.set(x, y, false);
                        more = changed = true;
                    }
        }
        // The tip rule above leaves short forks whose prongs touch; on a unit
        // width skeleton dropping one prong cannot cascade along a branch.
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (img.test(x, y) && touching_prong(img, x, y)) {
                    img.set(x, y, false);
                    changed = true;
                }
        if (!changed) return img;
    }
}

}  // namespace detail

BinaryMask skeletonize(const BinaryMask& mask) { return detail::skeletonize(mask, detail::Exec::Parallel); }

}  // namespace ariadne
