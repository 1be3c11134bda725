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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "canvas/backbone.hpp"
#include "canvas/micro_dag.hpp"
#include "canvas/primitive.hpp"

namespace canvas {

// How a [C|H,W] template covers a convolution with C_in != C_out.
//   kConcat: C_out = r * C_in, r copies on the full input, outputs
//            concatenated along channels.
//   kSum:    C_in = r * C_out, the input is split into r channel chunks, one
//            copy per chunk, outputs summed.
enum class ReplicaMode : std::uint8_t { kSingle, kConcat, kSum };

std::string_view replica_mode_name(ReplicaMode m);

// A template with every symbol bound.
struct ConcreteKernel {
  KernelTemplate tmpl;
  Assignment assignment;
  std::int64_t replicas = 1;
  ReplicaMode mode = ReplicaMode::kSingle;
  std::string target;

  friend bool operator==(const ConcreteKernel&, const ConcreteKernel&) = default;
};

// Values of the template variables per target: (target index, var) -> value.
using VarValues = std::map<std::pair<std::size_t, VariableId>, std::int64_t>;

// Sum of primitive costs of one template application.
Cost template_cost(const MicroDag& dag, const Assignment& a);

// Template cost times the replica count. Summing replica outputs costs
// (r - 1) * C * H * W extra FLOPs.
Cost kernel_cost(const ConcreteKernel& k);

// Dense convolution: params = C_in * C_out * K_H * K_W, flops = params * H * W.
Cost conv_baseline(const Target& t);

// original_flops / original_params of the target.
Cost original_cost(const Target& t);

// Sum of original target costs plus the non-replaced part.
Cost original_network_cost(const BackboneSpec& spec);

// Replaceable targets use the template under (G, x); the others keep their
// original cost.
Cost network_cost(const BackboneSpec& spec, const KernelTemplate& t, std::int64_t g,
                  const VarValues& x);

// Assignment for target `index`: its constants, G, and its variable values.
Assignment target_assignment(const BackboneSpec& spec, std::size_t index, std::int64_t g,
                             const VarValues& x);

ConcreteKernel make_concrete(const KernelTemplate& t, const Target& target, Assignment a);

// Upper bound on speedup when `replaceable_frac` of the cost is replaced by
// kernels costing `kernel_frac` of the original.
double ideal_speedup(double replaceable_frac, double kernel_frac);

struct TargetReport {
  std::string name;
  bool replaced = false;
  Cost original;
  Cost kernel;
};

struct NetworkReport {
  std::vector<TargetReport> targets;
  Cost original_total;
  Cost new_total;
  double flops_ratio = 1;
  double params_ratio = 1;
  double replaceable_frac = 0;
  double ideal_speedup = 1;
};

NetworkReport network_report(const BackboneSpec& spec, const KernelTemplate& t, std::int64_t g,
                             const VarValues& x);

}  // namespace canvas
