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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canvas/primitive.hpp"
#include "canvas/shape_algebra.hpp"

namespace canvas {

struct Edge {
  PrimitiveInstance inst;
  std::vector<std::size_t> inputs;
  std::size_t output = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Nodes are tensor shapes, edges are primitives. Node 0 is the input and
// edge k produces node k + 1, so node ids are a topological order.
class MicroDag {
 public:
  // The empty dag (no nodes). Use input_only() to start sampling.
  MicroDag() = default;

  // A single node shaped [C|H,W].
  static MicroDag input_only();

  const std::vector<Shape>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const Shape& shape(std::size_t node) const { return nodes_.at(node); }

  // Null for the input node.
  const Edge* producer(std::size_t node) const {
    return node == 0 || node > edges_.size() ? nullptr : &edges_[node - 1];
  }
  std::size_t out_degree(std::size_t node) const { return out_degree_.at(node); }
  bool is_leaf(std::size_t node) const { return out_degree_.at(node) == 0; }
  std::vector<std::size_t> leaves() const;

  // Number of leaves.
  std::size_t width() const { return width_; }

  // Appends the node produced by `inst` from `inputs`. Throws
  // Error(kShapeMismatch) when the declared input shapes differ from the
  // node shapes or an input id is out of range.
  MicroDag grow(PrimitiveInstance inst, std::vector<std::size_t> inputs) const&;
  MicroDag grow(PrimitiveInstance inst, std::vector<std::size_t> inputs) &&;

  // Convenience: computes the output shape from the node shapes.
  MicroDag grow(PrimitiveKind kind, std::vector<std::size_t> inputs) const&;

  // Rewrites every shape and primitive parameter without re-validation.
  // See apply_substitution() for the checked variant.
  MicroDag substitute_unchecked(VariableId id, const Dimension& expr) const;

  std::vector<VariableId> variables() const;

  // Value number of a node: equal numbers mean the tensors are equal for any
  // input and weights. FC outputs are always distinct.
  std::uint64_t value_number(std::size_t node) const { return value_numbers_.at(node); }

  // Highest variable id present, or 0.
  std::uint32_t max_variable_id() const;

  friend bool operator==(const MicroDag& a, const MicroDag& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void append(PrimitiveInstance&& inst, std::vector<std::size_t>&& inputs);

  std::vector<Shape> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_degree_;
  std::vector<std::uint64_t> value_numbers_;
  std::size_t width_ = 0;
};

struct KernelTemplate {
  MicroDag dag;
  std::size_t output_node = 0;
  std::vector<VariableId> free_vars;
  // Audit trail, e.g. "match: ..." and "subst: x2 := G*KH*KW".
  std::vector<std::string> notes;

  friend bool operator==(const KernelTemplate&, const KernelTemplate&) = default;
};

// Succeeds iff width is 1 and the single leaf is shaped [C|H,W]. Throws
// Error(kNotFinalizable).
KernelTemplate finalize(MicroDag dag, std::vector<std::string> notes = {});

// Returned for the empty dag (the 64-bit FNV-1a offset basis).
inline constexpr std::uint64_t kEmptyDagHash = 0xcbf29ce484222325ULL;

// Weisfeiler-Lehman style digest, invariant under node relabeling and
// variable renaming. Refinement runs for diameter(g) rounds.
std::uint64_t iso_hash(const MicroDag& g);

// Longest shortest path in the underlying undirected graph.
std::size_t undirected_diameter(const MicroDag& g);

enum PruneRule : std::uint32_t {
  kPruneConsecutiveElementWise = 1u << 0,
  kPruneSelfSubtraction = 1u << 1,
  kPruneGroupThenFold = 1u << 2,
  kPruneRepeatedSoftmax = 1u << 3,
};
inline constexpr std::uint32_t kAllPruneRules = kPruneConsecutiveElementWise |
                                                kPruneSelfSubtraction | kPruneGroupThenFold |
                                                kPruneRepeatedSoftmax;

// Reason the edge `kind(inputs)` would be redundant if appended to `g`.
std::optional<std::string_view> prune_check_edge(const MicroDag& g, const PrimitiveKind& kind,
                                                 std::span<const std::size_t> inputs,
                                                 std::uint32_t rules = kAllPruneRules);

// Checks every edge of `g` in order.
std::optional<std::string_view> prune_check(const MicroDag& g,
                                            std::uint32_t rules = kAllPruneRules);

}  // namespace canvas
