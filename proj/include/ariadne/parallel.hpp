// include/ariadne/parallel.hpp
// Thin OpenMP wrappers. Work is partitioned into fixed-size chunks that do not
// depend on the thread count, so chunked reductions are bit-identical to the
// serial order.
#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef ARIADNE_HAVE_OPENMP
#include <omp.h>
#endif

namespace ariadne::parallel {

inline int max_threads() {
#ifdef ARIADNE_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Calls f(i) for i in [0, n). Iterations must be independent.
template <class F>
void for_each_index(std::ptrdiff_t n, F&& f) {
#ifdef ARIADNE_HAVE_OPENMP
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#endif
}

// Dynamic schedule for uneven work items (cases, seeds, episodes).
template <class F>
void for_each_task(std::ptrdiff_t n, F&& f) {
#ifdef ARIADNE_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#endif
}

// Deterministic map-reduce: chunk partials are produced in parallel and folded
// left-to-right in chunk order. `map(begin, end)` returns a partial value;
// `fold(acc, partial)` accumulates.
template <class T, class Map, class Fold>
T chunked_reduce(std::size_t n, std::size_t chunk, T init, Map&& map, Fold&& fold) {
    if (n == 0) return init;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<T> partials(n_chunks, init);
    for_each_index(static_cast<std::ptrdiff_t>(n_chunks), [&](std::ptrdiff_t c) {
        const std::size_t begin = static_cast<std::size_t>(c) * chunk;
        partials[static_cast<std::size_t>(c)] = map(begin, std::min(n, begin + chunk));
    });
    T acc = std::move(init);
    for (auto& p : partials) fold(acc, p);
    return acc;
}

}  // namespace ariadne::parallel
