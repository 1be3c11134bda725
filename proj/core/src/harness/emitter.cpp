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

#include "canvas/harness/emitter.hpp"

#include <sstream>

#include "canvas/error.hpp"
#include "canvas/kernel_ir.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas::harness {

namespace {

constexpr std::string_view kPrelude = R"PY(import math

import torch
import torch.nn as nn


def _shift(t, dim, offset):
    n = t.shape[dim]
    pad = list(t.shape)
    pad[dim] = min(abs(offset), n)
    zeros = t.new_zeros(pad)
    if offset > 0:
        return torch.cat([t.narrow(dim, min(offset, n), n - pad[dim]), zeros], dim)
    return torch.cat([zeros, t.narrow(dim, 0, n - pad[dim])], dim)


def _unfold(t, dim, window, at):
    half = window // 2
    return torch.stack([_shift(t, dim, w - half) for w in range(window)], at)


def _fc(t, weight, nc, groups):
    b = t.shape[0]
    spatial = tuple(t.shape[1 + nc:])
    x = t.reshape(b, groups, -1, math.prod(spatial))
    w = weight.view(groups, -1, weight.shape[1])
    y = torch.einsum("bgis,goi->bgos", x, w)
    return y.reshape((b, weight.shape[0]) + spatial)


def _norm(bn, t):
    return bn(t.reshape(t.shape[0], t.shape[1], -1)).view_as(t)


def _fold(t, dim, mode):
    return t.mean(dim) if mode == "avg" else t.amax(dim)


def _softmax(t, first, last):
    return torch.softmax(t.flatten(first, last), first).view(t.shape)


_EW = {
    "relu": torch.relu,
    "abs": torch.abs,
    "sin": torch.sin,
    "exp": torch.exp,
    "neg": torch.neg,
}

_BCAST = {
    "add": lambda r, l: r + l,
    "sub": lambda r, l: r - l,
    "mul": lambda r, l: r * l,
    "min": torch.minimum,
    "max": torch.maximum,
}


def _bcast(lhs, rhs, p, l, r, s, op):
    b = rhs.shape[0]
    x = lhs.reshape(b, p, l, s).repeat(1, 1, r // l, 1)
    y = rhs.reshape(b, p, r, s)
    return _BCAST[op](y, x).reshape(rhs.shape)
)PY";

using Dims = std::vector<std::int64_t>;

std::int64_t prod(const Dims& d, std::size_t begin, std::size_t end) {
  std::int64_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= d[i];
  return p;
}

std::string tuple(const Dims& d) {
  std::string s = "(";
  for (auto v : d) s += std::to_string(v) + ", ";
  return s + ")";
}

std::size_t axis_index(const Shape& s, Axis axis) {
  const Dimension target = Dimension::of(axis_constant(axis));
  for (std::size_t i = 0; i < s.spatial.size(); ++i) {
    if (s.spatial[i] == target) return s.channel.size() + i;
  }
  throw Error(ErrorCode::kShapeMismatch, "axis missing from " + s.render());
}

std::string_view ew_name(ElementWiseFn fn) {
  switch (fn) {
    case ElementWiseFn::kRelu: return "relu";
    case ElementWiseFn::kAbs: return "abs";
    case ElementWiseFn::kSin: return "sin";
    case ElementWiseFn::kExp: return "exp";
    case ElementWiseFn::kNeg: return "neg";
  }
  return "?";
}

std::string_view op_name(BroadcastOp op) {
  switch (op) {
    case BroadcastOp::kAdd: return "add";
    case BroadcastOp::kSub: return "sub";
    case BroadcastOp::kMul: return "mul";
    case BroadcastOp::kMin: return "min";
    case BroadcastOp::kMax: return "max";
  }
  return "?";
}

std::string module_source(const ConcreteKernel& k, const EmitOptions& opts) {
  const Assignment& a = k.assignment;
  const auto& edges = k.tmpl.dag.edges();
  std::ostringstream init, fwd;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const Shape& in = e.inst.inputs[0];
    const Dims din = eval(in, a);
    const Dims dout = eval(e.inst.output, a);
    const std::string t_in = "t" + std::to_string(e.inputs[0]);
    fwd << "        t" << e.output << " = ";
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, Group>) {
            fwd << t_in << ".reshape((b,) + " << tuple(dout) << ")";
          } else if constexpr (std::is_same_v<P, Shift>) {
            fwd << "_shift(" << t_in << ", " << 1 + axis_index(in, p.axis) << ", " << p.offset << ")";
          } else if constexpr (std::is_same_v<P, Unfold>) {
            fwd << "_unfold(" << t_in << ", " << 1 + axis_index(in, p.axis) << ", "
                << a.constants.at(window_constant(p.axis)) << ", " << 1 + in.channel.size() << ")";
          } else if constexpr (std::is_same_v<P, FullyConnected>) {
            const std::int64_t groups = p.grouped ? din[0] : 1;
            const std::int64_t cin = prod(din, 0, in.channel.size());
            init << "        self.w" << i << " = nn.Parameter(torch.empty(" << dout[0] << ", "
                 << cin / groups << "))\n";
            init << "        self.bn" << i << " = nn.BatchNorm1d(" << dout[0]
                 << ", affine=False) if normalize else nn.Identity()\n";
            fwd << "_fc(" << t_in << ", self.w" << i << ", " << in.channel.size() << ", " << groups << ")\n";
            fwd << "        t" << e.output << " = _norm(self.bn" << i << ", t" << e.output << ")";
          } else if constexpr (std::is_same_v<P, ElementWise>) {
            fwd << "_EW[\"" << ew_name(p.fn) << "\"](" << t_in << ")";
          } else if constexpr (std::is_same_v<P, Fold>) {
            fwd << "_fold(" << t_in << ", " << 1 + p.dim << ", \""
                << (p.mode == Fold::Mode::kAvg ? "avg" : "max") << "\")";
          } else if constexpr (std::is_same_v<P, Softmax>) {
            fwd << "_softmax(" << t_in << ", " << 1 + p.first << ", " << 1 + p.last << ")";
          } else if constexpr (std::is_same_v<P, Broadcast>) {
            const auto m = match_broadcast(e.inst.inputs[0], e.inst.inputs[1]);
            if (!m) throw Error(ErrorCode::kShapeMismatch, "blend shapes do not match");
            const Dims dr = eval(e.inst.inputs[1], a);
            const std::size_t core_end = dr.size() - m->suffix_len;
            std::int64_t l = 1;
            for (const auto& d : m->lhs_core) l *= eval(d, a);
            fwd << "_bcast(" << t_in << ", t" << e.inputs[1] << ", " << prod(dr, 0, m->prefix_len) << ", "
                << l << ", " << prod(dr, m->prefix_len, core_end) << ", " << prod(dr, core_end, dr.size())
                << ", \"" << op_name(p.op) << "\")";
          }
        },
        e.inst.kind);
    fwd << "  # " << mnemonic(e.inst.kind) << " -> " << e.inst.output.render() << "\n";
  }

  std::ostringstream out;
  out << "# Kernel module for target '" << k.target << "'.\n";
  out << "#\n";
  std::istringstream ir(emit_ir(k));
  for (std::string line; std::getline(ir, line);) out << "#   " << line << "\n";
  out << "\n" << kPrelude << "\n\n";
  out << "NORMALIZE = " << (opts.normalize ? "True" : "False") << "\n";
  out << "ASSIGNMENT = \"" << render(a) << "\"\n\n\n";
  out << "class Template(nn.Module):\n";
  out << "    def __init__(self, normalize=NORMALIZE):\n";
  out << "        super().__init__()\n";
  out << init.str();
  out << "        for p in self.parameters():\n";
  out << "            nn.init.kaiming_uniform_(p, a=math.sqrt(5))\n\n";
  out << "    def forward(self, t0):\n";
  out << "        b = t0.shape[0]\n";
  out << fwd.str();
  out << "        return t" << k.tmpl.output_node << "\n\n\n";
  out << "class Kernel(nn.Module):\n";
  out << "    replicas = " << k.replicas << "\n";
  out << "    mode = \"" << replica_mode_name(k.mode) << "\"\n\n";
  out << "    def __init__(self, normalize=NORMALIZE):\n";
  out << "        super().__init__()\n";
  out << "        self.copies = nn.ModuleList([Template(normalize) for _ in range(self.replicas)])\n\n";
  out << "    def forward(self, x):\n";
  out << "        if self.mode == \"concat\":\n";
  out << "            return torch.cat([m(x) for m in self.copies], 1)\n";
  out << "        if self.mode == \"sum\":\n";
  out << "            chunks = x.chunk(self.replicas, 1)\n";
  out << "            out = self.copies[0](chunks[0])\n";
  out << "            for m, c in zip(self.copies[1:], chunks[1:]):\n";
  out << "                out = out + m(c)\n";
  out << "            return out\n";
  out << "        return self.copies[0](x)\n";
  return out.str();
}

}  // namespace

std::string emit(const ConcreteKernel& k, EmitFormat format, const EmitOptions& opts) {
  return format == EmitFormat::kIr ? emit_ir(k) : module_source(k, opts);
}

}  // namespace canvas::harness
