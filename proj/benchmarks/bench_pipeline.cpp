#include <benchmark/benchmark.h>

#include "trackfuse/fusion.hpp"
#include "trackfuse/motion.hpp"
#include "trackfuse/synth.hpp"
#include "trackfuse/trackers.hpp"

using namespace trackfuse;

namespace {

const Scenario& scenario() {
    static const Scenario s = [] {
        ScenarioConfig sc;
        sc.num_frames = 500;
        return generate_scenario(sc);
    }();
    return s;
}

}  // namespace

static void BM_RunSequence(benchmark::State& state) {
    TrackerConfig cfg;
    cfg.kind = static_cast<TrackerKind>(state.range(0));
    state.SetLabel(std::string(to_string(cfg.kind)));
    const auto& seq = scenario().sequence;
    for (auto _ : state) benchmark::DoNotOptimize(run_sequence(seq, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.frames.size()));
}
BENCHMARK(BM_RunSequence)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

static void BM_Relabel(benchmark::State& state) {
    const auto tracked = run_sequence(scenario().sequence, TrackerConfig{});
    const auto mode = static_cast<FusionMode>(state.range(0));
    state.SetLabel(std::string(to_string(mode)));
    for (auto _ : state) benchmark::DoNotOptimize(relabel(tracked, mode));
}
BENCHMARK(BM_Relabel)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

static void BM_FusePair(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> p(n), q(n);
    Rng rng(5);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng.uniform(0.01, 1.0);
        q[i] = rng.uniform(0.01, 1.0);
    }
    const auto a = validate_distribution(p, n), b = validate_distribution(q, n);
    for (auto _ : state) benchmark::DoNotOptimize(fuse_pair(a, b));
}
BENCHMARK(BM_FusePair)->Arg(10)->Arg(100)->Arg(1000);

static void BM_KalmanStep(benchmark::State& state) {
    const auto spec = state.range(0) == 0 ? MotionModelSpec::sort_defaults() : MotionModelSpec::centroid_defaults();
    const BoundingBox z{100, 100, 150, 180};
    auto st = kf_init(z, spec);
    for (auto _ : state) {
        st = kf_update(kf_predict(st, spec), z, spec);
        benchmark::DoNotOptimize(st);
    }
}
BENCHMARK(BM_KalmanStep)->Arg(0)->Arg(1);
