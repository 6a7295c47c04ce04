// src/topology/distance.cpp
// Exact Euclidean distance transform by dimensional decomposition: a column
// pass computes 1-D distances to the nearest zero, then each row takes the
// lower envelope of parabolas over the squared column distances. All
// arithmetic stays in integers until the final square root.
#include <cmath>
#include <limits>

#include "ariadne/topology.hpp"
#include "exec.hpp"

namespace ariadne {
namespace detail {
namespace {

using i64 = long long;
constexpr i64 kInf = std::numeric_limits<i64>::max() / 4;

// 1-D squared distance transform of sampled function f (lower envelope of
// parabolas). `v` and `z` are scratch buffers sized n and n+1.
void envelope_1d(const i64* f, i64* out, int n, std::vector<int>& v, std::vector<double>& z) {
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] >= kInf) continue;
        const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
        while (k >= 0) {
            const int p = v[k];
            const double s = (fq - (static_cast<double>(f[p]) + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (s <= z[k]) --k;
            else {
                ++k;
                v[k] = q;
                z[k] = s;
                break;
            }
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -std::numeric_limits<double>::infinity();
        }
    }
    if (k < 0) {
        for (int q = 0; q < n; ++q) out[q] = kInf;
        return;
    }
    z[k + 1] = std::numeric_limits<double>::infinity();
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const i64 d = q - v[j];
        out[q] = d * d + f[v[j]];
    }
}

// Squared distance to the nearest pixel where `is_seed` holds.
std::vector<i64> squared_edt(int w, int h, const std::vector<std::uint8_t>& is_seed, Exec exec) {
    std::vector<i64> col(static_cast<std::size_t>(w) * h);
    run_rows(exec, w, [&](std::ptrdiff_t xi) {
        const int x = static_cast<int>(xi);
        i64 last = -1;
        for (int y = 0; y < h; ++y) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (is_seed[i]) last = y;
            col[i] = last < 0 ? kInf : (y - last);
        }
        last = -1;
        for (int y = h - 1; y >= 0; --y) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (is_seed[i]) last = y;
            if (last >= 0 && last - y < col[i]) col[i] = last - y;
        }
        for (int y = 0; y < h; ++y) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (col[i] < kInf) col[i] *= col[i];
        }
    });

    std::vector<i64> out(col.size());
    run_rows(exec, h, [&](std::ptrdiff_t yi) {
        std::vector<int> v(w);
        std::vector<double> z(static_cast<std::size_t>(w) + 1);
        const std::size_t row = static_cast<std::size_t>(yi) * w;
        envelope_1d(col.data() + row, out.data() + row, w, v, z);
    });
    return out;
}

}  // namespace

DistanceField distance_transform(const BinaryMask& mask, Exec exec) {
    // One-pixel background frame models the outside of the image.
    const int w = mask.width() + 2;
    const int h = mask.height() + 2;
    std::vector<std::uint8_t> seed(static_cast<std::size_t>(w) * h, 1);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            seed[static_cast<std::size_t>(y + 1) * w + (x + 1)] = mask.test(x, y) ? 0 : 1;
    const auto sq = squared_edt(w, h, seed, exec);

    std::vector<double> values(mask.size());
    run_rows(exec, mask.height(), [&](std::ptrdiff_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < mask.width(); ++x)
            values[mask.index(x, y)] = std::sqrt(static_cast<double>(sq[static_cast<std::size_t>(y + 1) * w + (x + 1)]));
    });
    return DistanceField(mask.width(), mask.height(), std::move(values));
}

Grid<double> distance_to_set(const BinaryMask& seeds, Exec exec) {
    std::vector<std::uint8_t> seed(seeds.values().begin(), seeds.values().end());
    const auto sq = squared_edt(seeds.width(), seeds.height(), seed, exec);
    std::vector<double> values(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        values[i] = sq[i] >= kInf ? std::numeric_limits<double>::infinity() : std::sqrt(static_cast<double>(sq[i]));
    return Grid<double>(seeds.width(), seeds.height(), std::move(values));
}

BinaryMask boundary_mask(const BinaryMask& mask, Exec exec) {
    BinaryMask out(mask.width(), mask.height());
    run_rows(exec, mask.height(), [&](std::ptrdiff_t yi) {
        const int y = static_cast<int>(yi);
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.test(x, y)) continue;
            const bool edge = !mask.test_or_background(x - 1, y) || !mask.test_or_background(x + 1, y) ||
                              !mask.test_or_background(x, y - 1) || !mask.test_or_background(x, y + 1);
            if (edge) out.set(x, y);
        }
    });
    return out;
}

}  // namespace detail

DistanceField distance_transform(const BinaryMask& mask) {
    return detail::distance_transform(mask, detail::Exec::Parallel);
}
Grid<double> distance_to_set(const BinaryMask& seeds) { return detail::distance_to_set(seeds, detail::Exec::Parallel); }
BinaryMask boundary_mask(const BinaryMask& mask) { return detail::boundary_mask(mask, detail::Exec::Parallel); }

}  // namespace ariadne
