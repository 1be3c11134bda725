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

#include "canvas/cost_model.hpp"

#include "canvas/error.hpp"

namespace canvas {

std::string_view replica_mode_name(ReplicaMode m) {
  switch (m) {
    case ReplicaMode::kSingle: return "single";
    case ReplicaMode::kConcat: return "concat";
    case ReplicaMode::kSum: return "sum";
  }
  return "?";
}

Cost template_cost(const MicroDag& dag, const Assignment& a) {
  Cost c;
  for (const auto& e : dag.edges()) c += cost(e.inst, a);
  return c;
}

Cost kernel_cost(const ConcreteKernel& k) {
  Cost c = template_cost(k.tmpl.dag, k.assignment) * k.replicas;
  if (k.mode == ReplicaMode::kSum && k.replicas > 1) {
    c.flops += (k.replicas - 1) * eval(k.tmpl.dag.shape(k.tmpl.output_node), k.assignment)[0] *
               k.assignment.constants.at(Constant::kH) * k.assignment.constants.at(Constant::kW);
  }
  return c;
}

Cost conv_baseline(const Target& t) {
  const std::int64_t params = t.c_in * t.c_out * t.kh * t.kw;
  return {params * t.h * t.w, params};
}

Cost original_cost(const Target& t) { return {t.original_flops, t.original_params}; }

Cost original_network_cost(const BackboneSpec& spec) {
  Cost c{spec.non_replaced_flops, spec.non_replaced_params};
  for (const auto& t : spec.targets) c += original_cost(t);
  return c;
}

Assignment target_assignment(const BackboneSpec& spec, std::size_t index, std::int64_t g,
                             const VarValues& x) {
  Assignment a = target_constants(spec.targets.at(index), g);
  for (const auto& [key, v] : x) {
    if (key.first == index) a.dynvars[key.second] = v;
  }
  return a;
}

ConcreteKernel make_concrete(const KernelTemplate& t, const Target& target, Assignment a) {
  if (!target.replaceable()) {
    throw Error(ErrorCode::kNotReplaceable,
                target.name + ": C_in=" + std::to_string(target.c_in) +
                    " and C_out=" + std::to_string(target.c_out) + " are not multiples");
  }
  ConcreteKernel k;
  k.tmpl = t;
  k.assignment = std::move(a);
  k.replicas = target.replicas();
  k.mode = target.c_out > target.c_in   ? ReplicaMode::kConcat
           : target.c_in > target.c_out ? ReplicaMode::kSum
                                        : ReplicaMode::kSingle;
  k.target = target.name;
  return k;
}

Cost network_cost(const BackboneSpec& spec, const KernelTemplate& t, std::int64_t g,
                  const VarValues& x) {
  Cost total{spec.non_replaced_flops, spec.non_replaced_params};
  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    const Target& target = spec.targets[i];
    if (!target.replaceable()) {
      total += original_cost(target);
      continue;
    }
    total += kernel_cost(make_concrete(t, target, target_assignment(spec, i, g, x)));
  }
  return total;
}

double ideal_speedup(double replaceable_frac, double kernel_frac) {
  return 1.0 / (1.0 - replaceable_frac * (1.0 - kernel_frac));
}

NetworkReport network_report(const BackboneSpec& spec, const KernelTemplate& t, std::int64_t g,
                             const VarValues& x) {
  NetworkReport r;
  r.original_total = original_network_cost(spec);
  r.new_total = {spec.non_replaced_flops, spec.non_replaced_params};
  Cost replaceable_original;
  Cost replaced_kernels;
  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    const Target& target = spec.targets[i];
    TargetReport row;
    row.name = target.name;
    row.original = original_cost(target);
    row.replaced = target.replaceable();
    row.kernel = row.replaced
                     ? kernel_cost(make_concrete(t, target, target_assignment(spec, i, g, x)))
                     : row.original;
    if (row.replaced) {
      replaceable_original += row.original;
      replaced_kernels += row.kernel;
    }
    r.new_total += row.kernel;
    r.targets.push_back(std::move(row));
  }
  auto ratio = [](std::int64_t a, std::int64_t b) {
    return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  r.flops_ratio = ratio(r.new_total.flops, r.original_total.flops);
  r.params_ratio = ratio(r.new_total.params, r.original_total.params);
  r.replaceable_frac = ratio(replaceable_original.flops, r.original_total.flops);
  r.ideal_speedup = ideal_speedup(r.replaceable_frac,
                                  ratio(replaced_kernels.flops, replaceable_original.flops));
  return r;
}

}  // namespace canvas
