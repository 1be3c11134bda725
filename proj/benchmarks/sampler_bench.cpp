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

#include "canvas/micro_dag.hpp"
#include "canvas/sampler.hpp"

namespace {

// Time per accepted kernel; arg is N.
void BM_SampleKernel(benchmark::State& state) {
  canvas::SamplerConfig cfg;
  cfg.nodes = static_cast<std::size_t>(state.range(0));
  cfg.seed = 1;
  cfg.max_attempts = 1000000;
  canvas::Sampler s(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample());
  state.counters["attempts/kernel"] = benchmark::Counter(
      static_cast<double>(s.stats().sampled) / static_cast<double>(s.stats().accepted));
}
BENCHMARK(BM_SampleKernel)->Arg(6)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_IsoHash(benchmark::State& state) {
  canvas::SamplerConfig cfg;
  cfg.nodes = static_cast<std::size_t>(state.range(0));
  cfg.seed = 2;
  const canvas::KernelTemplate t = canvas::Sampler(cfg).sample();
  for (auto _ : state) benchmark::DoNotOptimize(canvas::iso_hash(t.dag));
}
BENCHMARK(BM_IsoHash)->Arg(12)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
