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

// Replacement targets and analytical budgets.
//
// A backbone file is JSON:
//
//   {
//     "targets": [
//       {"name": "conv1", "C_in": 64, "C_out": 64, "H": 56, "W": 56,
//        "K_H": 3, "K_W": 3, "original_flops": 115605504,
//        "original_params": 36864}
//     ],
//     "non_replaced_flops": 0,
//     "non_replaced_params": 0
//   }
//
// original_flops / original_params default to the dense convolution cost.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvas/shape_algebra.hpp"

namespace canvas {

struct Target {
  std::string name;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t kh = 0;
  std::int64_t kw = 0;
  std::int64_t original_flops = 0;
  std::int64_t original_params = 0;

  // One channel count must be a multiple of the other.
  bool replaceable() const;
  // min(C_in, C_out): the C the template is instantiated with.
  std::int64_t channels() const;
  // max(C_in, C_out) / min(C_in, C_out).
  std::int64_t replicas() const;
};

struct BackboneSpec {
  std::vector<Target> targets;
  std::int64_t non_replaced_flops = 0;
  std::int64_t non_replaced_params = 0;
};

// Throws Error(kParse) or Error(kInvalidArgument).
BackboneSpec parse_backbone(std::string_view json);
BackboneSpec load_backbone(const std::string& path);
std::string to_json(const BackboneSpec& spec);

// Constants for one target: C, H, W, KH, KW and (when > 0) G.
Assignment target_constants(const Target& t, std::int64_t g);

struct Budget {
  std::optional<std::int64_t> max_flops;
  std::optional<std::int64_t> max_params;

  bool bounded() const { return max_flops || max_params; }
};

// Bounds as fractions of the original network totals (rounded down).
Budget budget_from_fractions(const BackboneSpec& spec, std::optional<double> flops_frac,
                             std::optional<double> params_frac);

}  // namespace canvas
