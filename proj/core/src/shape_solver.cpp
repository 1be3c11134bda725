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

#include "canvas/shape_solver.hpp"

#include <algorithm>

#include "canvas/error.hpp"
#include "canvas/micro_dag.hpp"
#include "canvas/primitive.hpp"

namespace canvas {

namespace {

Monomial product(const std::vector<Dimension>& dims) {
  Monomial m;
  for (const auto& d : dims) m = m * d.monomial();
  return m;
}

std::string render_dims(const std::vector<Dimension>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ',';
    s += dims[i].render();
  }
  return s + "]";
}

bool same_slot(const Shape& a, std::size_t i, const Shape& b, std::size_t j) {
  return a.region(i) == b.region(j) && a.flat(i) == b.flat(j);
}

}  // namespace

std::string BroadcastMatch::render() const {
  std::string s = "prefix=" + std::to_string(prefix_len) + " suffix=" + std::to_string(suffix_len) +
                  " lhs=" + render_dims(lhs_core) + " rhs=" + render_dims(rhs_core) +
                  " M=" + ratio.render();
  if (lhs_var) {
    s += " " + variable_name(*lhs_var) + " in {";
    for (std::size_t i = 0; i < substitutions.size(); ++i) {
      if (i) s += ',';
      s += substitutions[i].render();
    }
    s += "}";
  }
  return s;
}

std::optional<BroadcastMatch> match_broadcast(const Shape& lhs, const Shape& rhs) {
  const std::size_t nl = lhs.rank();
  const std::size_t nr = rhs.rank();
  const std::size_t shorter = std::min(nl, nr);

  BroadcastMatch m;
  while (m.prefix_len < shorter && same_slot(lhs, m.prefix_len, rhs, m.prefix_len)) {
    ++m.prefix_len;
  }
  while (m.prefix_len + m.suffix_len < shorter &&
         same_slot(lhs, nl - 1 - m.suffix_len, rhs, nr - 1 - m.suffix_len)) {
    ++m.suffix_len;
  }
  for (std::size_t i = m.prefix_len; i + m.suffix_len < nl; ++i) m.lhs_core.push_back(lhs.flat(i));
  for (std::size_t i = m.prefix_len; i + m.suffix_len < nr; ++i) m.rhs_core.push_back(rhs.flat(i));

  m.ratio = product(m.rhs_core) / product(m.lhs_core);
  const Monomial num = m.ratio.divisibility_numerator();
  Monomial den = m.ratio.divisibility_denominator();
  const bool num_has_var = !num.variables().empty();

  std::optional<VariableId> lhs_var;
  for (const auto& [id, e] : m.ratio.variables()) {
    if (e < 0) lhs_var = id;
  }
  if (!lhs_var) {
    // An RHS variable in the numerator can absorb any remaining
    // denominator; the constraint solver picks a multiple.
    if (!den.is_one() && !num_has_var) return std::nullopt;
    m.legal_without_substitution = true;
    return m;
  }

  // ratio = num / (den' * x_L). Substituting x_L := f leaves num / (f * den'),
  // integral iff den' is empty or the quotient keeps an RHS variable.
  den = den / Monomial::of(*lhs_var);
  const bool rest_is_one = den.is_one();
  for (auto& f : enumerate_factors(Dimension(num))) {
    const Monomial quotient = num / f.monomial();
    if (rest_is_one || !quotient.variables().empty()) m.substitutions.push_back(std::move(f));
  }
  if (m.substitutions.empty()) return std::nullopt;
  m.lhs_var = lhs_var;
  return m;
}

MicroDag apply_substitution(const MicroDag& dag, VariableId id, const Dimension& expr) {
  const auto vars = dag.variables();
  if (std::find(vars.begin(), vars.end(), id) == vars.end()) return dag;
  const std::string what = variable_name(id) + " := " + expr.render();

  MicroDag g = dag.substitute_unchecked(id, expr);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const Shape& s = g.shape(v);
    if (auto bad = validate_theorem1(s); !bad.empty()) {
      throw Error(ErrorCode::kIllegalSubstitution,
                  what + ": n" + std::to_string(v) + " " + s.render() + " has " +
                      std::string(bad.front().name()));
    }
    if (!non_integral_dims(s).empty()) {
      throw Error(ErrorCode::kIllegalSubstitution,
                  what + ": n" + std::to_string(v) + " " + s.render() + " is not integral");
    }
  }
  for (const auto& e : g.edges()) {
    try {
      if (!(output_shape(e.inst.kind, e.inst.inputs) == e.inst.output)) {
        throw Error(ErrorCode::kIllegalSubstitution,
                    what + ": " + mnemonic(e.inst.kind) + " no longer yields n" +
                        std::to_string(e.output));
      }
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kIllegalSubstitution) throw;
      throw Error(ErrorCode::kIllegalSubstitution, what + ": " + err.what());
    }
  }
  return g;
}

KernelTemplate apply_substitution(const KernelTemplate& t, VariableId id, const Dimension& expr) {
  KernelTemplate out;
  out.dag = apply_substitution(t.dag, id, expr);
  out.output_node = t.output_node;
  out.free_vars = out.dag.variables();
  out.notes = t.notes;
  if (!(out.dag == t.dag)) {
    out.notes.push_back("subst: " + variable_name(id) + " := " + expr.render());
  }
  return out;
}

}  // namespace canvas
