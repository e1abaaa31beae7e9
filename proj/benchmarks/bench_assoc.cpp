#include <benchmark/benchmark.h>

#include "trackfuse/assoc.hpp"
#include "trackfuse/synth.hpp"

using namespace trackfuse;

namespace {

CostMatrix random_costs(std::size_t n, double gate_fraction) {
    Rng rng(n);
    CostMatrix cm(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) cm.set(r, c, rng.uniform(), !rng.bernoulli(gate_fraction));
    return cm;
}

}  // namespace

static void BM_SolveAssignment(benchmark::State& state) {
    const auto cm = random_costs(static_cast<std::size_t>(state.range(0)), 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(cm));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(4, 256)->Complexity(benchmark::oNCubed);

static void BM_SolveGreedy(benchmark::State& state) {
    const auto cm = random_costs(static_cast<std::size_t>(state.range(0)), 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(solve_greedy(cm));
}
BENCHMARK(BM_SolveGreedy)->RangeMultiplier(2)->Range(4, 256);

static void BM_Iou(benchmark::State& state) {
    const BoundingBox a{10, 10, 60, 80}, b{30, 20, 90, 95};
    for (auto _ : state) benchmark::DoNotOptimize(iou(a, b));
}
BENCHMARK(BM_Iou);

static void BM_Cosine(benchmark::State& state) {
    Rng rng(3);
    std::vector<double> u(static_cast<std::size_t>(state.range(0))), v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = rng.normal();
        v[i] = rng.normal();
    }
    for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(u, v));
}
BENCHMARK(BM_Cosine)->Arg(16)->Arg(128)->Arg(512);
