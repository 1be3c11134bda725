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

// Resolves the variables left after sampling against analytical budgets:
// picks a global group count G, derives minimal legal values per target from
// divisibility requirements, then doubles variables while every budget holds.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "canvas/backbone.hpp"
#include "canvas/cost_model.hpp"
#include "canvas/micro_dag.hpp"

namespace canvas {

// Divisors of gcd(min(C_in, C_out)) over replaceable targets, excluding 1.
std::vector<std::int64_t> candidate_G(const BackboneSpec& spec);

// True when any dimension or primitive of the template refers to G.
bool uses_group_count(const KernelTemplate& t);

// Smallest multiple every occurrence of `var` needs under `constants` for the
// dims, grouped-FC quotients and blend ratios of the template to be integral.
std::int64_t divisibility_lcm(const KernelTemplate& t, VariableId var, const Assignment& constants);

// x[1,j] = lcm[1,j] for the target with the smallest C; for the others
// x[i,j] = ceil(C_i * lcm[1,j] / (C_1 * lcm[i,j])) * lcm[i,j].
VarValues base_values(const KernelTemplate& t, const BackboneSpec& spec, std::int64_t g);

struct Solution {
  std::int64_t g = 0;
  VarValues x;
  Cost achieved;
  std::string status = "ok";  // or "budget-unsaturated"
  int iterations = 0;

  friend bool operator==(const Solution&, const Solution&) = default;
};

struct Discarded {
  std::string reason;
  std::optional<Cost> base;
};

using SolveResult = std::variant<Solution, Discarded>;

struct MaximizeOptions {
  int max_iterations = 32;
};

// Discards when the base values already exceed the budget. Each iteration
// visits variables by ascending sensitivity (cost increase from doubling,
// normalized by the budget bound, worst constraint first), ties by
// (target, var), and doubles each one if all bounds still hold.
SolveResult maximize(const KernelTemplate& t, const BackboneSpec& spec, std::int64_t g,
                     const VarValues& base, const Budget& budget,
                     const MaximizeOptions& opts = {});

// Checks that every node of every replaceable target is integral.
std::optional<std::string> check_integral(const KernelTemplate& t, const BackboneSpec& spec,
                                          std::int64_t g, const VarValues& x);

struct SolveOptions {
  std::optional<std::int64_t> g;  // otherwise drawn from candidate_G
  std::uint64_t seed = 0;
  MaximizeOptions maximize;
};

SolveResult solve(const KernelTemplate& t, const BackboneSpec& spec, const Budget& budget,
                  const SolveOptions& opts = {});

// One kernel per replaceable target, replicated to cover C_in != C_out.
std::vector<ConcreteKernel> instantiate(const KernelTemplate& t, const BackboneSpec& spec,
                                        const Solution& sol);

// Throws Error(kNotReplaceable) for a flagged target.
ConcreteKernel instantiate_target(const KernelTemplate& t, const BackboneSpec& spec,
                                  const Solution& sol, std::size_t index);

}  // namespace canvas
