// include/ariadne/topology.hpp
// Exact discrete-topology kernels over binary masks.
//
// Foreground connectivity is 8 and background connectivity 4 unless a caller
// asks otherwise. Every kernel in `ariadne::` may split rows or columns across
// OpenMP threads; the matching function in `ariadne::serial::` runs the same
// algorithm on one thread and is kept as the reference the parallel path must
// reproduce bit for bit.
#pragma once

#include <vector>

#include "ariadne/raster.hpp"

namespace ariadne {

enum class Connectivity { Four = 4, Eight = 8 };

struct LabeledComponents {
    // 0 = background, components numbered 1..count in raster order of their
    // first pixel.
    Grid<int> labels;
    int count = 0;  // beta_0
};

LabeledComponents connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

// Number of foreground components (Betti number beta_0).
int betti0(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

// Per-pixel Euclidean distance from a foreground pixel to the nearest
// background pixel; 0 on background. Pixels outside the frame count as
// background, so an all-foreground mask measures distance to the border.
class DistanceField : public Grid<double> {
public:
    DistanceField() = default;
    DistanceField(int width, int height, std::vector<double> values)
        : Grid<double>(width, height, std::move(values)) {}
};

DistanceField distance_transform(const BinaryMask& mask);

// Euclidean distance from every pixel to the nearest pixel of `seeds` (no
// frame padding). Infinity everywhere when `seeds` is empty.
Grid<double> distance_to_set(const BinaryMask& seeds);

// Zhang-Suen two-subiteration thinning. Deletion candidates of a subiteration
// are marked in parallel against the current image, then committed in raster
// order; each commit re-checks on the partially thinned image that the pixel
// is still a simple point (Yokoi 8-connectivity number 1) and not an end
// point, so beta_0 is preserved. Pixels left with an all-foreground 3x3
// neighborhood (possible only around holes) are removed afterwards and
// thinning resumes; the result is a fixed point, so skeletonize is idempotent.
BinaryMask skeletonize(const BinaryMask& mask);

// Foreground pixels with a background 4-neighbor or touching the frame edge,
// in raster order.
std::vector<Pixel> boundary_pixels(const BinaryMask& mask);
BinaryMask boundary_mask(const BinaryMask& mask);

namespace serial {

DistanceField distance_transform(const BinaryMask& mask);
Grid<double> distance_to_set(const BinaryMask& seeds);
BinaryMask skeletonize(const BinaryMask& mask);
BinaryMask boundary_mask(const BinaryMask& mask);

}  // namespace serial

}  // namespace ariadne
