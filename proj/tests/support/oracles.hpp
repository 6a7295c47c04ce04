// tests/support/oracles.hpp
// Independent reference computations used only by tests. Nothing here calls
// into the kernels it is meant to check.
#pragma once

#include <cstdint>
#include <vector>

#include "ariadne/raster.hpp"
#include "ariadne/rng.hpp"

namespace oracle {

using ariadne::BinaryMask;
using ariadne::Pixel;

// Even-odd test at a pixel center, written independently of the scanline
// rasterizer.
bool center_inside(const std::vector<ariadne::Point2>& poly, int x, int y);

// Stack flood fill component count.
int flood_fill_components(const BinaryMask& mask, int connectivity);

// Distance from each foreground pixel to the nearest background pixel,
// including the one-pixel frame outside the image, by exhaustive search.
std::vector<double> brute_force_edt(const BinaryMask& mask);

// Classic parallel Zhang-Suen (all marked pixels of a subiteration deleted at
// once).
BinaryMask classic_zhang_suen(const BinaryMask& mask);

// Foreground pixels whose 4-neighborhood touches background or the frame.
std::vector<Pixel> brute_boundary(const BinaryMask& mask);

BinaryMask random_mask(ariadne::Rng& rng, int w, int h, double density);

// Thick polyline "tube": disks of given radius stamped along segments.
BinaryMask tube(int w, int h, std::vector<ariadne::Point2> polyline, double radius);

// Random tube fixture: one to three tubes with radii in [1.5, 4].
BinaryMask random_tube_fixture(ariadne::Rng& rng, int w, int h);

struct Counts {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
};
Counts brute_counts(const BinaryMask& pred, const BinaryMask& gt);

}  // namespace oracle
