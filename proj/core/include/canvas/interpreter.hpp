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

// Reference executor for concrete kernels on small dense float64 tensors.
//
// Tensors are row-major over the flat dims (channel dims, then spatial
// dims) of the node shape. The executor counts FLOPs as it computes, so the
// count can be compared against the analytical cost model.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "canvas/cost_model.hpp"
#include "canvas/micro_dag.hpp"

namespace canvas {

struct DenseTensor {
  std::vector<std::int64_t> dims;
  std::vector<double> data;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::int64_t> d, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  static std::size_t volume(std::span<const std::int64_t> dims);
};

// FC weights by edge index. Shape [out, in / groups].
using WeightMap = std::map<std::size_t, DenseTensor>;

struct ExecResult {
  DenseTensor output;
  std::int64_t flops = 0;
};

// Runs one application of the template. `input` must be [C, H, W].
// Throws Error(kShapeMismatch) or Error(kNonFinite).
ExecResult execute(const KernelTemplate& t, const Assignment& a, const WeightMap& weights,
                   const DenseTensor& input);

// Runs the replicated kernel on [C_in, H, W]; one weight map per replica.
ExecResult execute(const ConcreteKernel& k, std::span<const WeightMap> weights,
                   const DenseTensor& input);

// Weight dims for every FC edge of `t` under `a`.
std::map<std::size_t, std::vector<std::int64_t>> weight_shapes(const KernelTemplate& t,
                                                               const Assignment& a);

WeightMap random_weights(const KernelTemplate& t, const Assignment& a, std::mt19937_64& rng);
DenseTensor random_tensor(std::vector<std::int64_t> dims, std::mt19937_64& rng);

// Direct convolution with zero padding and centered K_H x K_W windows.
// `filter` is [C_out, C_in / groups, K_H, K_W].
DenseTensor direct_conv(const DenseTensor& input, const DenseTensor& filter, std::int64_t groups);

enum class ConvOracle : std::uint8_t { kDirect, kGrouped, kDepthwise };

// For kernels made of rearrangements plus a single FC: reshapes the FC
// weights into a filter, runs the oracle and returns the largest absolute
// difference over `trials` random inputs and weights.
double equivalence_check(const ConcreteKernel& k, ConvOracle oracle, int trials,
                         std::uint64_t seed = 1);

// Whitespace-separated numbers.
DenseTensor read_tensor_text(const std::string& text, std::vector<std::int64_t> dims);
std::string write_tensor_text(const DenseTensor& t);

}  // namespace canvas
