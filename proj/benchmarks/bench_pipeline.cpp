#include <benchmark/benchmark.h>

#include "flowar/instrument.hpp"
#include "flowar/pipeline.hpp"

namespace {

using namespace flowar;

ModelConfig pipeline_config(int n, bool fast) {
    ModelConfig cfg;
    cfg.schedule = ScaleSchedule::create(3, 2, n, n);
    cfg.channels = 4;
    cfg.weight_bound = 0.1;
    cfg.seed = 7;
    if (fast) {
        cfg.fast = true;
        cfg.delta = 1e-6;
        // calibrated once from the exact run
        ModelConfig probe = cfg;
        probe.fast = false;
        instrument::reset();
        const InferResult res = flowar_infer(probe, build_weights(probe), 0);
        cfg.qk_bound = res.stats.max_qk_abs * 1.05;
    }
    return cfg;
}

void BM_GenerateExact(benchmark::State& state) {
    const ModelConfig cfg = pipeline_config(static_cast<int>(state.range(0)), false);
    const ModelWeights weights = build_weights(cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flowar_infer(cfg, weights, 0));
    }
    state.SetComplexityN(state.range(0));
}

void BM_GenerateFast(benchmark::State& state) {
    const ModelConfig cfg = pipeline_config(static_cast<int>(state.range(0)), true);
    const ModelWeights weights = build_weights(cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flowar_infer(cfg, weights, 0));
    }
    state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_GenerateExact)->RangeMultiplier(2)->Range(8, 64)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateFast)->RangeMultiplier(2)->Range(8, 64)->Complexity()->Unit(benchmark::kMillisecond);
