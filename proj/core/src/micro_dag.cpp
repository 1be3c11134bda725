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

#include "canvas/micro_dag.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <string_view>

#include "canvas/error.hpp"

namespace canvas {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t seed, std::uint64_t v) {
  return splitmix(seed ^ (v + 0x632be59bd9b4e019ULL + (seed << 7) + (seed >> 3)));
}

std::uint64_t hash_text(std::string_view s) {
  std::uint64_t h = kEmptyDagHash;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Replaces every "x<digits>" by "x" so that labels do not depend on how
// variables happen to be numbered.
std::string erase_variable_ids(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s[i]);
    if (s[i] == 'x') {
      while (i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9') ++i;
    }
  }
  return out;
}

}  // namespace

MicroDag MicroDag::input_only() {
  MicroDag g;
  g.nodes_.push_back(Shape::input());
  g.out_degree_.push_back(0);
  g.value_numbers_.push_back(splitmix(0));
  g.width_ = 1;
  return g;
}

std::vector<std::size_t> MicroDag::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (out_degree_[i] == 0) out.push_back(i);
  }
  return out;
}

void MicroDag::append(PrimitiveInstance&& inst, std::vector<std::size_t>&& inputs) {
  if (inst.inputs.size() != inputs.size()) {
    throw Error(ErrorCode::kShapeMismatch, mnemonic(inst.kind) + ": input count mismatch");
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k] >= nodes_.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  mnemonic(inst.kind) + ": input node n" + std::to_string(inputs[k]) + " absent");
    }
    if (!(inst.inputs[k] == nodes_[inputs[k]])) {
      throw Error(ErrorCode::kShapeMismatch,
                  mnemonic(inst.kind) + ": declared input " + inst.inputs[k].render() +
                      " but n" + std::to_string(inputs[k]) + " is " +
                      nodes_[inputs[k]].render());
    }
  }
  const std::size_t id = nodes_.size();
  std::uint64_t vn = hash_text(mnemonic(inst.kind));
  if (std::holds_alternative<FullyConnected>(inst.kind)) {
    vn = combine(vn, 0xfc00000000000000ULL + id);  // independent weights
  }
  for (auto in : inputs) {
    vn = combine(vn, value_numbers_[in]);
    if (out_degree_[in]++ == 0) --width_;
  }
  nodes_.push_back(inst.output);
  out_degree_.push_back(0);
  value_numbers_.push_back(vn);
  ++width_;
  edges_.push_back(Edge{std::move(inst), std::move(inputs), id});
}

MicroDag MicroDag::grow(PrimitiveInstance inst, std::vector<std::size_t> inputs) const& {
  MicroDag g = *this;
  g.append(std::move(inst), std::move(inputs));
  return g;
}

MicroDag MicroDag::grow(PrimitiveInstance inst, std::vector<std::size_t> inputs) && {
  append(std::move(inst), std::move(inputs));
  return std::move(*this);
}

MicroDag MicroDag::grow(PrimitiveKind kind, std::vector<std::size_t> inputs) const& {
  std::vector<Shape> shapes;
  for (auto in : inputs) {
    if (in >= nodes_.size()) {
      throw Error(ErrorCode::kShapeMismatch, "input node n" + std::to_string(in) + " absent");
    }
    shapes.push_back(nodes_[in]);
  }
  return grow(make_instance(std::move(kind), std::move(shapes)), std::move(inputs));
}

MicroDag MicroDag::substitute_unchecked(VariableId id, const Dimension& expr) const {
  MicroDag g = *this;
  for (auto& s : g.nodes_) s = substitute(s, id, expr);
  for (auto& e : g.edges_) {
    for (auto& s : e.inst.inputs) s = substitute(s, id, expr);
    e.inst.output = substitute(e.inst.output, id, expr);
    if (auto* fc = std::get_if<FullyConnected>(&e.inst.kind)) {
      fc->output = substitute(fc->output, id, expr);
    }
  }
  return g;
}

std::vector<VariableId> MicroDag::variables() const {
  std::vector<VariableId> out;
  for (const auto& s : nodes_) {
    for (auto v : s.variables()) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t MicroDag::max_variable_id() const {
  std::uint32_t m = 0;
  for (const auto& s : nodes_) {
    for (auto v : s.variables()) m = std::max(m, v.value);
  }
  return m;
}

KernelTemplate finalize(MicroDag dag, std::vector<std::string> notes) {
  if (dag.num_nodes() == 0) throw Error(ErrorCode::kNotFinalizable, "empty dag");
  if (dag.width() != 1) {
    throw Error(ErrorCode::kNotFinalizable,
                "width is " + std::to_string(dag.width()) + ", expected 1");
  }
  const std::size_t out = dag.leaves().front();
  if (!(dag.shape(out) == Shape::input())) {
    throw Error(ErrorCode::kNotFinalizable,
                "output shape " + dag.shape(out).render() + " is not [C|H,W]");
  }
  KernelTemplate t;
  t.free_vars = dag.variables();
  t.output_node = out;
  t.dag = std::move(dag);
  t.notes = std::move(notes);
  return t;
}

std::size_t undirected_diameter(const MicroDag& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : g.edges()) {
    for (auto in : e.inputs) {
      adj[in].push_back(e.output);
      adj[e.output].push_back(in);
    }
  }
  std::size_t best = 0;
  std::vector<std::size_t> dist(n);
  std::deque<std::size_t> queue;
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kUnseen);
    dist[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      best = std::max(best, dist[u]);
      for (auto v : adj[u]) {
        if (dist[v] == kUnseen) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return best;
}

std::uint64_t iso_hash(const MicroDag& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return kEmptyDagHash;

  // successors[v] = (consumer node, operand position)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> successors(n);
  for (const auto& e : g.edges()) {
    for (std::size_t k = 0; k < e.inputs.size(); ++k) successors[e.inputs[k]].push_back({e.output, k});
  }

  std::vector<std::uint64_t> label(n);
  for (std::size_t v = 0; v < n; ++v) {
    const Edge* p = g.producer(v);
    std::uint64_t h = hash_text(p ? erase_variable_ids(mnemonic(p->inst.kind)) : "input");
    h = combine(h, hash_text(erase_variable_ids(g.shape(v).render())));
    h = combine(h, p ? p->inputs.size() : 0);
    label[v] = h;
  }

  const std::size_t rounds = undirected_diameter(g);
  std::vector<std::uint64_t> next(n);
  std::vector<std::uint64_t> succ;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t v = 0; v < n; ++v) {
      std::uint64_t h = combine(label[v], 0x5052454445434553ULL);  // predecessors
      if (const Edge* p = g.producer(v)) {
        for (std::size_t k = 0; k < p->inputs.size(); ++k) h = combine(h, combine(label[p->inputs[k]], k));
      }
      succ.clear();
      for (const auto& [w, k] : successors[v]) succ.push_back(combine(label[w], k));
      std::sort(succ.begin(), succ.end());
      h = combine(h, 0x5355434345535352ULL);  // successors
      for (auto s : succ) h = combine(h, s);
      next[v] = h;
    }
    label.swap(next);
  }

  std::sort(label.begin(), label.end());
  std::uint64_t h = combine(kEmptyDagHash, n);
  h = combine(h, g.edges().size());
  for (auto l : label) h = combine(h, l);
  return h;
}

std::optional<std::string_view> prune_check_edge(const MicroDag& g, const PrimitiveKind& kind,
                                                 std::span<const std::size_t> inputs,
                                                 std::uint32_t rules) {
  const Edge* prev = inputs.empty() ? nullptr : g.producer(inputs[0]);
  if (rules & kPruneConsecutiveElementWise) {
    if (const auto* ew = std::get_if<ElementWise>(&kind); ew && prev) {
      if (const auto* p = std::get_if<ElementWise>(&prev->inst.kind); p && p->fn == ew->fn) {
        return "consecutive identical elementwise";
      }
    }
  }
  if (rules & kPruneSelfSubtraction) {
    if (const auto* b = std::get_if<Broadcast>(&kind); b && b->op == BroadcastOp::kSub) {
      if (inputs.size() == 2 && g.value_number(inputs[0]) == g.value_number(inputs[1])) {
        return "self-subtraction";
      }
    }
  }
  if (rules & kPruneGroupThenFold) {
    if (const auto* f = std::get_if<Fold>(&kind); f && prev) {
      if (const auto* gr = std::get_if<Group>(&prev->inst.kind);
          gr && gr->mode == Group::Mode::kEach && f->dim == gr->dim + 1) {
        return "fold undoes group";
      }
    }
  }
  if (rules & kPruneRepeatedSoftmax) {
    if (const auto* sm = std::get_if<Softmax>(&kind); sm && prev) {
      if (const auto* p = std::get_if<Softmax>(&prev->inst.kind); p && *p == *sm) {
        return "repeated softmax";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string_view> prune_check(const MicroDag& g, std::uint32_t rules) {
  for (const auto& e : g.edges()) {
    if (auto r = prune_check_edge(g, e.inst.kind, e.inputs, rules)) return r;
  }
  return std::nullopt;
}

}  // namespace canvas
