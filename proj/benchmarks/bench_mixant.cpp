/*
 * Copyright 2026 The MixANT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "mixant/diffusion.hpp"
#include "mixant/model.hpp"
#include "mixant/ops.hpp"
#include "mixant/rng.hpp"
#include "mixant/ssm.hpp"

namespace {

using namespace mixant;

void BM_SelectiveScan(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const std::size_t D = 64, N = 16;
  Rng rng(1);
  const Tensor x = rng.normal_tensor({T, D}), C = rng.normal_tensor({T, N});
  const Tensor a = rng.uniform_tensor({T, D, N}, 0.5, 0.99), b = rng.normal_tensor({T, D, N});
  for (auto _ : state) benchmark::DoNotOptimize(selective_scan(x, a, b, C));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SelectiveScan)->RangeMultiplier(2)->Range(128, 2048)->Complexity(benchmark::oN);

void BM_Discretize(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const std::size_t D = 64, N = 16;
  Rng rng(2);
  const Tensor A = rng.uniform_tensor({D, N}, -4.0, -0.5);
  const Tensor B = rng.normal_tensor({T, N});
  const Tensor delta = rng.uniform_tensor({T, D}, 0.001, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(discretize(A, B, delta));
}
BENCHMARK(BM_Discretize)->Arg(128)->Arg(1024);

ModelConfig bench_model(std::size_t K, std::size_t E) {
  ModelConfig c;
  c.d_model = 32;
  c.num_blocks = K;
  c.static_blocks = K < 3 ? 0 : 3;
  c.num_experts = E;
  return c;
}

void BM_ModelPredict(benchmark::State& state) {
  const ModelConfig c = bench_model(static_cast<std::size_t>(state.range(0)),
                                    static_cast<std::size_t>(state.range(1)));
  const MixAntModel m(c);
  Rng rng(3);
  const std::size_t P = 20, F = 60;
  const Tensor noisy = rng.normal_tensor({P + F, c.num_classes});
  const ConditioningTensor cond =
      build_conditioning(rng.normal_tensor({P, c.feature_dim}), F);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(noisy, cond.features, P, 500));
}
BENCHMARK(BM_ModelPredict)
    ->Args({6, 1})
    ->Args({6, 5})
    ->Args({12, 5})
    ->Args({15, 5})
    ->Unit(benchmark::kMillisecond);

void BM_TrainingStep(benchmark::State& state) {
  const ModelConfig c = bench_model(6, static_cast<std::size_t>(state.range(0)));
  MixAntModel m(c);
  Rng rng(4);
  const std::size_t P = 20, F = 20;
  const Tensor noisy = rng.normal_tensor({P + F, c.num_classes});
  const Tensor target = rng.normal_tensor({P + F, c.num_classes});
  const Tensor cond = build_conditioning(rng.normal_tensor({P, c.feature_dim}), F).features;
  for (auto _ : state) {
    Graph g;
    const auto out = m.forward(g, noisy, cond, P, 500);
    const Var loss = ops::mse(out.scores, g.constant(target));
    m.parameters().zero_grad();
    g.backward(loss);
    benchmark::DoNotOptimize(loss.value().item());
  }
}
BENCHMARK(BM_TrainingStep)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
