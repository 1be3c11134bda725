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

// Broadcast matching between two shapes and propagation of the resulting
// variable substitutions through a micro-DAG.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "canvas/shape_algebra.hpp"

namespace canvas {

class MicroDag;
struct KernelTemplate;

// Decomposition of LHS and RHS into
//   [prefix..., lhs_core..., suffix...] and [prefix..., rhs_core..., suffix...].
// Prefix and suffix are maximal runs of structurally equal dimensions in the
// same region; the suffix never overlaps the prefix.
struct BroadcastMatch {
  std::size_t prefix_len = 0;
  std::size_t suffix_len = 0;
  std::vector<Dimension> lhs_core;
  std::vector<Dimension> rhs_core;

  // size(rhs_core) / size(lhs_core). May hold the LHS variable in its
  // denominator until a substitution is applied.
  Monomial ratio;

  // The LHS core variable, if it sits in the ratio's denominator.
  std::optional<VariableId> lhs_var;

  // Candidate values for `lhs_var` (sorted, includes "1" when legal). Empty
  // when `lhs_var` is unset.
  std::vector<Dimension> substitutions;

  // The blend is legal as-is. A ratio whose denominator is absorbed by an
  // RHS variable (e.g. x2/G) is legal and constrains that variable.
  bool legal_without_substitution = false;

  std::string render() const;
};

// No value means the shapes cannot be blended under any substitution.
std::optional<BroadcastMatch> match_broadcast(const Shape& lhs, const Shape& rhs);

// Replaces `id` by `expr` everywhere in the dag (node shapes and primitive
// parameters) and re-validates every node, every blend and every grouped
// FC. Throws Error(kIllegalSubstitution).
MicroDag apply_substitution(const MicroDag& dag, VariableId id, const Dimension& expr);

// Same, also refreshing free_vars and recording a "subst:" note.
KernelTemplate apply_substitution(const KernelTemplate& t, VariableId id, const Dimension& expr);

}  // namespace canvas
