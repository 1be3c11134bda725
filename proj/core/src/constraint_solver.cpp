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

#include "canvas/constraint_solver.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "canvas/error.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas {

namespace {

__extension__ typedef __int128 Int128;

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a / g, b, &r)) {
    throw Error(ErrorCode::kInvalidArgument, "lcm overflow");
  }
  return r;
}

std::int64_t value_of(const Monomial& m, const Assignment& a) {
  return eval(Dimension(m), a);
}

// Monomials whose integrality constrains template variables.
std::vector<Monomial> constrained_monomials(const KernelTemplate& t) {
  std::vector<Monomial> out;
  for (const auto& s : t.dag.nodes()) {
    for (std::size_t i = 0; i < s.rank(); ++i) {
      if (s.flat(i).has_variable()) out.push_back(s.flat(i).monomial());
    }
  }
  for (const auto& e : t.dag.edges()) {
    if (const auto* fc = std::get_if<FullyConnected>(&e.inst.kind); fc && fc->grouped) {
      out.push_back(fc->output.monomial() / e.inst.inputs[0].channel[0].monomial());
    } else if (std::holds_alternative<Broadcast>(e.inst.kind)) {
      if (auto m = match_broadcast(e.inst.inputs[0], e.inst.inputs[1])) out.push_back(m->ratio);
    }
  }
  return out;
}

bool within(const Cost& c, const Budget& b) {
  return (!b.max_flops || c.flops <= *b.max_flops) && (!b.max_params || c.params <= *b.max_params);
}

// Exact fraction num/den with den >= 0; den == 0 means +infinity.
struct Ratio {
  Int128 num = 0;
  Int128 den = 1;
};

bool less(const Ratio& a, const Ratio& b) {
  if (a.den == 0 || b.den == 0) return a.den != 0 && b.den == 0;
  return a.num * b.den < b.num * a.den;
}

bool equal(const Ratio& a, const Ratio& b) { return !less(a, b) && !less(b, a); }

Ratio sensitivity(const Cost& now, const Cost& doubled, const Budget& b) {
  Ratio worst{0, 1};
  auto consider = [&](std::int64_t delta, const std::optional<std::int64_t>& bound) {
    if (!bound) return;
    Ratio r = *bound > 0 ? Ratio{delta, *bound} : Ratio{delta, delta > 0 ? 0 : 1};
    if (less(worst, r)) worst = r;
  };
  consider(doubled.flops - now.flops, b.max_flops);
  consider(doubled.params - now.params, b.max_params);
  if (!b.bounded()) worst = Ratio{doubled.flops - now.flops, 1};
  return worst;
}

std::vector<std::size_t> replaceable_indices(const BackboneSpec& spec) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    if (spec.targets[i].replaceable()) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> candidate_G(const BackboneSpec& spec) {
  std::int64_t g = 0;
  for (const auto& t : spec.targets) {
    if (t.replaceable()) g = std::gcd(g, t.channels());
  }
  std::vector<std::int64_t> out;
  for (std::int64_t d = 2; d <= g; ++d) {
    if (g % d == 0) out.push_back(d);
  }
  return out;
}

bool uses_group_count(const KernelTemplate& t) {
  for (const auto& s : t.dag.nodes()) {
    for (std::size_t i = 0; i < s.rank(); ++i) {
      if (s.flat(i).monomial().exponent(Constant::kG) != 0) return true;
    }
  }
  for (const auto& e : t.dag.edges()) {
    if (const auto* g = std::get_if<Group>(&e.inst.kind); g && g->mode == Group::Mode::kByG) {
      return true;
    }
    if (const auto* fc = std::get_if<FullyConnected>(&e.inst.kind)) {
      if (fc->output.monomial().exponent(Constant::kG) != 0) return true;
    }
  }
  return false;
}

std::int64_t divisibility_lcm(const KernelTemplate& t, VariableId var, const Assignment& constants) {
  std::int64_t l = 1;
  for (const auto& m : constrained_monomials(t)) {
    if (m.exponent(var) != 1) continue;
    const Monomial rest = m / Monomial::of(var);
    if (!rest.variables().empty()) continue;
    const std::int64_t p = value_of(rest.numerator(), constants);
    const std::int64_t q = value_of(rest.denominator(), constants);
    l = checked_lcm(l, q / std::gcd(p, q));
  }
  return l;
}

VarValues base_values(const KernelTemplate& t, const BackboneSpec& spec, std::int64_t g) {
  VarValues out;
  const auto idx = replaceable_indices(spec);
  if (idx.empty() || t.free_vars.empty()) return out;
  std::size_t first = idx.front();
  for (auto i : idx) {
    if (spec.targets[i].channels() < spec.targets[first].channels()) first = i;
  }
  const std::int64_t c1 = spec.targets[first].channels();
  for (auto var : t.free_vars) {
    const std::int64_t lcm1 = divisibility_lcm(t, var, target_constants(spec.targets[first], g));
    for (auto i : idx) {
      if (i == first) {
        out[{i, var}] = lcm1;
        continue;
      }
      const std::int64_t lcmi = divisibility_lcm(t, var, target_constants(spec.targets[i], g));
      const Int128 num = static_cast<Int128>(spec.targets[i].channels()) * lcm1;
      const Int128 den = static_cast<Int128>(c1) * lcmi;
      const Int128 k = std::max<Int128>(1, (num + den - 1) / den);
      out[{i, var}] = static_cast<std::int64_t>(k * lcmi);
    }
  }
  return out;
}

std::optional<std::string> check_integral(const KernelTemplate& t, const BackboneSpec& spec,
                                          std::int64_t g, const VarValues& x) {
  for (auto i : replaceable_indices(spec)) {
    const Assignment a = target_assignment(spec, i, g, x);
    try {
      for (const auto& s : t.dag.nodes()) eval(s, a);
      for (const auto& e : t.dag.edges()) {
        cost(e.inst, a);
        if (std::holds_alternative<Broadcast>(e.inst.kind)) {
          auto m = match_broadcast(e.inst.inputs[0], e.inst.inputs[1]);
          if (!m) throw Error(ErrorCode::kNonIntegral, "blend lost its match");
          std::int64_t rhs = 1;
          std::int64_t lhs = 1;
          for (const auto& d : m->rhs_core) rhs *= eval(d, a);
          for (const auto& d : m->lhs_core) lhs *= eval(d, a);
          if (rhs % lhs != 0) {
            throw Error(ErrorCode::kNonIntegral, "blend ratio " + m->ratio.render() + " under " + render(a));
          }
        }
      }
    } catch (const Error& e) {
      return spec.targets[i].name + ": " + e.what();
    }
  }
  return std::nullopt;
}

SolveResult maximize(const KernelTemplate& t, const BackboneSpec& spec, std::int64_t g,
                     const VarValues& base, const Budget& budget, const MaximizeOptions& opts) {
  auto cost_at = [&](const VarValues& x) -> std::optional<Cost> {
    try {
      return network_cost(spec, t, g, x);
    } catch (const Error&) {
      return std::nullopt;  // overflow counts as infeasible
    }
  };
  auto base_cost = cost_at(base);
  if (!base_cost) return Discarded{"base values overflow", std::nullopt};
  if (!within(*base_cost, budget)) return Discarded{"over budget at base values", base_cost};

  Solution sol;
  sol.g = g;
  sol.x = base;
  sol.achieved = *base_cost;
  for (sol.iterations = 0; sol.iterations < opts.max_iterations; ++sol.iterations) {
    struct Entry {
      Ratio key;
      std::pair<std::size_t, VariableId> var;
    };
    std::vector<Entry> order;
    for (const auto& [key, v] : sol.x) {
      VarValues trial = sol.x;
      trial[key] = v * 2;
      auto c = cost_at(trial);
      order.push_back({c ? sensitivity(sol.achieved, *c, budget) : Ratio{1, 0}, key});
    }
    std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
      if (!equal(a.key, b.key)) return less(a.key, b.key);
      return a.var < b.var;
    });
    bool doubled = false;
    for (const auto& entry : order) {
      VarValues trial = sol.x;
      std::int64_t& v = trial[entry.var];
      if (__builtin_mul_overflow(v, 2, &v)) continue;
      auto c = cost_at(trial);
      if (!c || !within(*c, budget)) continue;
      sol.x = std::move(trial);
      sol.achieved = *c;
      doubled = true;
    }
    if (!doubled) return sol;
  }
  sol.status = "budget-unsaturated";
  return sol;
}

SolveResult solve(const KernelTemplate& t, const BackboneSpec& spec, const Budget& budget,
                  const SolveOptions& opts) {
  const auto idx = replaceable_indices(spec);
  if (idx.empty()) return Discarded{"no replaceable target", std::nullopt};
  std::int64_t g = 0;
  if (uses_group_count(t)) {
    const auto candidates = candidate_G(spec);
    if (opts.g) {
      if (std::find(candidates.begin(), candidates.end(), *opts.g) == candidates.end()) {
        return Discarded{"G=" + std::to_string(*opts.g) + " does not divide every target", std::nullopt};
      }
      g = *opts.g;
    } else {
      if (candidates.empty()) return Discarded{"no group count divides every target", std::nullopt};
      std::mt19937_64 rng(opts.seed);
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      g = candidates[pick(rng)];
    }
  }
  VarValues base;
  try {
    base = base_values(t, spec, g);
  } catch (const Error& e) {
    return Discarded{std::string("base values: ") + e.what(), std::nullopt};
  }
  if (auto bad = check_integral(t, spec, g, base)) return Discarded{"non-integral: " + *bad, std::nullopt};
  return maximize(t, spec, g, base, budget, opts.maximize);
}

ConcreteKernel instantiate_target(const KernelTemplate& t, const BackboneSpec& spec,
                                  const Solution& sol, std::size_t index) {
  return make_concrete(t, spec.targets.at(index), target_assignment(spec, index, sol.g, sol.x));
}

std::vector<ConcreteKernel> instantiate(const KernelTemplate& t, const BackboneSpec& spec,
                                        const Solution& sol) {
  std::vector<ConcreteKernel> out;
  for (auto i : replaceable_indices(spec)) out.push_back(instantiate_target(t, spec, sol, i));
  return out;
}

}  // namespace canvas
