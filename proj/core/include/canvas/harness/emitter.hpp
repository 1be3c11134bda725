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

// Kernel artifacts: canonical IR, or Python source of a PyTorch module that
// the trainer plugin loads.
//
// The module source defines `Kernel(nn.Module)` taking (B, C_in, H, W). Each
// replica is a `Template` whose FC weights are parameters `w<edge>` shaped
// [out, in / groups], matching the interpreter's weight layout. With
// normalization on, every FC output passes through a non-affine batch norm.

#pragma once

#include <string>

#include "canvas/cost_model.hpp"

namespace canvas::harness {

enum class EmitFormat { kIr, kModuleSource };

struct EmitOptions {
  bool normalize = true;
};

std::string emit(const ConcreteKernel& k, EmitFormat format, const EmitOptions& opts = {});

}  // namespace canvas::harness
