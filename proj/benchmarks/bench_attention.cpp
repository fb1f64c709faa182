#include <benchmark/benchmark.h>

#include "flowar/fast_attention.hpp"
#include "flowar/layers.hpp"
#include "flowar/rng.hpp"

namespace {

using namespace flowar;

struct Instance {
    Tensor3 x;
    AttentionWeights w;
    double qk_bound;
};

Instance make_instance(int n, int c) {
    SeededRng rng(derive_seed(7, n, c));
    const double x_bound = 0.6;
    const double target_R = 0.5;
    Tensor3 x(n, 1, c);
    for (double& v : x.data) v = rng.uniform(-x_bound, x_bound);
    return {std::move(x), AttentionWeights::random(c, target_R / (c * x_bound), rng), target_R};
}

void BM_ExactAttention(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Instance inst = make_instance(n, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attention(inst.x, inst.w));
    }
    state.SetComplexityN(n);
}

void BM_FastAttention(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Instance inst = make_instance(n, 4);
    const PolyApproxConfig cfg = choose_degree(inst.qk_bound, 4, 1e-8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(aattc(inst.x, inst.w, cfg));
    }
    state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(BM_ExactAttention)->RangeMultiplier(2)->Range(64, 2048)->Complexity();
BENCHMARK(BM_FastAttention)->RangeMultiplier(2)->Range(64, 2048)->Complexity();
