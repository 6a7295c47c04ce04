// bench/bench_kernels.cpp
// Serial reference vs OpenMP kernels on synthetic vessel masks. The size
// argument is the canvas side in pixels.
#include <map>

#include <benchmark/benchmark.h>

#include "ariadne/synth_angio.hpp"
#include "ariadne/topology.hpp"

namespace {

using namespace ariadne;

const BinaryMask& vessel_mask(int side) {
    static std::map<int, BinaryMask> cache;
    auto it = cache.find(side);
    if (it == cache.end()) {
        SynthConfig cfg;
        cfg.width = cfg.height = side;
        cfg.depth = 3;
        it = cache.emplace(side, generate_case(cfg, 17).gt_mask).first;
    }
    return it->second;
}

template <class F>
void run(benchmark::State& state, F&& kernel) {
    const auto& mask = vessel_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernel(mask));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mask.size()));
}

void BM_DistanceSerial(benchmark::State& s) { run(s, [](const BinaryMask& m) { return serial::distance_transform(m); }); }
void BM_DistanceParallel(benchmark::State& s) { run(s, [](const BinaryMask& m) { return distance_transform(m); }); }
void BM_DistanceToSetSerial(benchmark::State& s) { run(s, [](const BinaryMask& m) { return serial::distance_to_set(m); }); }
void BM_DistanceToSetParallel(benchmark::State& s) { run(s, [](const BinaryMask& m) { return distance_to_set(m); }); }
void BM_SkeletonSerial(benchmark::State& s) { run(s, [](const BinaryMask& m) { return serial::skeletonize(m); }); }
void BM_SkeletonParallel(benchmark::State& s) { run(s, [](const BinaryMask& m) { return skeletonize(m); }); }
void BM_BoundarySerial(benchmark::State& s) { run(s, [](const BinaryMask& m) { return serial::boundary_mask(m); }); }
void BM_BoundaryParallel(benchmark::State& s) { run(s, [](const BinaryMask& m) { return boundary_mask(m); }); }

}  // namespace

#define SIZES ->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMicrosecond)
BENCHMARK(BM_DistanceSerial) SIZES;
BENCHMARK(BM_DistanceParallel) SIZES;
BENCHMARK(BM_DistanceToSetSerial) SIZES;
BENCHMARK(BM_DistanceToSetParallel) SIZES;
BENCHMARK(BM_SkeletonSerial) SIZES;
BENCHMARK(BM_SkeletonParallel) SIZES;
BENCHMARK(BM_BoundarySerial) SIZES;
BENCHMARK(BM_BoundaryParallel) SIZES;

BENCHMARK_MAIN();
