// src/topology/exec.hpp
// Execution switch shared by the parallel kernels and their serial reference.
#pragma once

#include <cstddef>

#include "ariadne/parallel.hpp"

namespace ariadne::detail {

enum class Exec { Serial, Parallel };

template <class F>
void run_rows(Exec exec, std::ptrdiff_t n, F&& f) {
    if (exec == Exec::Parallel) {
        parallel::for_each_index(n, f);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    }
}

}  // namespace ariadne::detail

#include "ariadne/topology.hpp"

namespace ariadne::detail {

DistanceField distance_transform(const BinaryMask& mask, Exec exec);
Grid<double> distance_to_set(const BinaryMask& seeds, Exec exec);
BinaryMask boundary_mask(const BinaryMask& mask, Exec exec);
BinaryMask skeletonize(const BinaryMask& mask, Exec exec);

}  // namespace ariadne::detail
