// src/topology/serial_reference.cpp
// Single-threaded entry points for the same kernels; tests and the benchmark
// compare these against the parallel path.
#include "exec.hpp"

namespace ariadne::serial {

DistanceField distance_transform(const BinaryMask& mask) {
    return detail::distance_transform(mask, detail::Exec::Serial);
}
Grid<double> distance_to_set(const BinaryMask& seeds) { return detail::distance_to_set(seeds, detail::Exec::Serial); }
BinaryMask skeletonize(const BinaryMask& mask) { return detail::skeletonize(mask, detail::Exec::Serial); }
BinaryMask boundary_mask(const BinaryMask& mask) { return detail::boundary_mask(mask, detail::Exec::Serial); }

}  // namespace ariadne::serial
