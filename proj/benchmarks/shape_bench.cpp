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

#include "canvas/shape_algebra.hpp"
#include "canvas/shape_solver.hpp"

namespace {

void BM_MatchBroadcast(benchmark::State& state) {
  const canvas::Shape lhs = canvas::parse_shape("[x1,KH|H,W]");
  const canvas::Shape rhs = canvas::parse_shape("[G,x2/G,KH,KW|H,W]");
  for (auto _ : state) benchmark::DoNotOptimize(canvas::match_broadcast(lhs, rhs));
}
BENCHMARK(BM_MatchBroadcast);

void BM_EnumerateFactors(benchmark::State& state) {
  const canvas::Dimension d = canvas::parse_dimension("C*KH*KW");
  for (auto _ : state) benchmark::DoNotOptimize(canvas::enumerate_factors(d));
}
BENCHMARK(BM_EnumerateFactors);

void BM_ParseShape(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(canvas::parse_shape("[G,C/G,KH,KW|H,W]"));
}
BENCHMARK(BM_ParseShape);

}  // namespace

BENCHMARK_MAIN();
