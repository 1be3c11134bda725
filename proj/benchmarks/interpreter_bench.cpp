// Copyright 2026 The Canvas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "canvas/interpreter.hpp"
#include "canvas/micro_dag.hpp"
#include "canvas/primitive.hpp"

namespace {

// unfold(h), unfold(w), FC: a dense KxK convolution. Arg is C = H = W.
void BM_UnfoldConv(benchmark::State& state) {
  using namespace canvas;
  const auto n = state.range(0);
  MicroDag g = MicroDag::input_only();
  g = g.grow(Unfold{Axis::kH}, {0});
  g = g.grow(Unfold{Axis::kW}, {1});
  g = g.grow(FullyConnected{parse_dimension("C"), false}, {2});
  const KernelTemplate t = finalize(std::move(g));
  const std::string s = std::to_string(n);
  const Assignment a = parse_assignment("C=" + s + ",H=" + s + ",W=" + s + ",KH=3,KW=3");
  std::mt19937_64 rng(1);
  const WeightMap w = random_weights(t, a, rng);
  const DenseTensor in = random_tensor({n, n, n}, rng);
  std::int64_t flops = 0;
  for (auto _ : state) {
    const ExecResult r = execute(t, a, w, in);
    flops = r.flops;
    benchmark::DoNotOptimize(r.output.data.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(flops),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_UnfoldConv)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_DirectConv(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(1);
  const canvas::DenseTensor in = canvas::random_tensor({n, n, n}, rng);
  const canvas::DenseTensor f = canvas::random_tensor({n, n, 3, 3}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(canvas::direct_conv(in, f, 1).data.data());
}
BENCHMARK(BM_DirectConv)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
