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

// Textual kernel IR.
//
//   canvas-ir v1
//   # subst: x2 := G*KH*KW
//   n0: shape=[C|H,W]
//   n1: shape=[x1|H,W]
//   e: fc(x1) (0) -> 1
//   ...
//   vars: x1
//
// Concrete kernels append `target:`, `assign:` and `replicate:` lines. A
// solver result appends `solution:` plus one `x:` line per target.
//
// `# subst: x := e` lines are applied when a blend edge needs them, so a
// hand-written IR may declare the shapes before substitution. Emitted IR is
// always post-substitution and parses back to the same template.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "canvas/backbone.hpp"
#include "canvas/constraint_solver.hpp"
#include "canvas/cost_model.hpp"
#include "canvas/micro_dag.hpp"

namespace canvas {

inline constexpr std::string_view kIrHeader = "canvas-ir v1";

std::string emit_ir(const KernelTemplate& t);
std::string emit_ir(const ConcreteKernel& k);

// Lines describing a solver result; append to a template IR.
std::string emit_solution(const Solution& s, const BackboneSpec& spec);

struct IrDocument {
  KernelTemplate tmpl;
  std::optional<ConcreteKernel> concrete;
  std::optional<Solution> solution;  // `x:` lines refer to target indices
};

// Throws Error(kParse) on malformed text and Error(kShapeMismatch) when a
// declared shape disagrees with the one the edges produce.
IrDocument parse_ir_document(std::string_view text);
KernelTemplate parse_ir(std::string_view text);
ConcreteKernel parse_concrete_ir(std::string_view text);

}  // namespace canvas
