// Microbenchmarks for the hot paths: long convolution (FFT vs direct),
// the DeltaNet recurrence, and the dense matmul kernel.

#include <benchmark/benchmark.h>

#include "reverso/layers.hpp"
#include "reverso/numerics.hpp"
#include "reverso/rng.hpp"

namespace {

using namespace reverso;

Tensor2 random_tensor(Rng& rng, std::size_t r, std::size_t c) {
    Tensor2 t(r, c);
    for (double& v : t.data) v = rng.normal();
    return t;
}

void bm_conv_fft(benchmark::State& state) {
    const std::size_t L = static_cast<std::size_t>(state.range(0)), d = 32;
    Rng rng(1);
    const Tensor2 x = random_tensor(rng, L, d);
    const Tensor2 w = random_tensor(rng, L, d);
    for (auto _ : state) benchmark::DoNotOptimize(causal_depthwise_conv_fft(x, w));
    state.SetComplexityN(static_cast<std::int64_t>(L));
}
BENCHMARK(bm_conv_fft)->Range(128, 2048)->Complexity(benchmark::oNLogN);

void bm_conv_direct(benchmark::State& state) {
    const std::size_t L = static_cast<std::size_t>(state.range(0)), d = 32;
    Rng rng(1);
    const Tensor2 x = random_tensor(rng, L, d);
    const Tensor2 w = random_tensor(rng, L, d);
    for (auto _ : state) benchmark::DoNotOptimize(causal_depthwise_conv_direct(x, w));
    state.SetComplexityN(static_cast<std::int64_t>(L));
}
BENCHMARK(bm_conv_direct)->Range(128, 2048)->Complexity(benchmark::oNSquared);

void bm_deltanet(benchmark::State& state) {
    const std::size_t L = static_cast<std::size_t>(state.range(0)), d = 32;
    Rng rng(2);
    DeltaNetBlock blk(d, false);
    for (ParamRef& p : [&] {
             std::vector<ParamRef> ps;
             blk.collect_params(ps, "b");
             return ps;
         }())
        for (double& v : p.p->value.data) v = 0.05 * rng.normal();
    const Tensor2 x = random_tensor(rng, L, d);
    const std::vector<double> carry(d, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(blk.forward(x, carry));
}
BENCHMARK(bm_deltanet)->Range(128, 2048);

void bm_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const Tensor2 a = random_tensor(rng, n, n);
    const Tensor2 b = random_tensor(rng, n, n);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(bm_matmul)->Range(32, 256);

}  // namespace

BENCHMARK_MAIN();
