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

#include "canvas/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "canvas/error.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas {

namespace {

using Dims = std::vector<std::int64_t>;

std::int64_t prod(const Dims& d, std::size_t begin, std::size_t end) {
  std::int64_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= d[i];
  return p;
}

std::size_t axis_position(const Shape& s, Axis axis) {
  const Dimension target = Dimension::of(axis_constant(axis));
  for (std::size_t i = 0; i < s.spatial.size(); ++i) {
    if (s.spatial[i] == target) return s.channel.size() + i;
  }
  throw Error(ErrorCode::kShapeMismatch, "axis " + std::string(axis_name(axis)) + " absent in " + s.render());
}

struct EdgeRunner {
  const Edge& edge;
  const Assignment& a;
  const WeightMap& weights;
  std::int64_t& flops;

  DenseTensor run(std::span<const DenseTensor* const> in) {
    const PrimitiveInstance& inst = edge.inst;
    DenseTensor out(eval(inst.output, a));
    const Dims din = eval(inst.inputs[0], a);
    const DenseTensor& x = *in[0];
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Group> || std::is_same_v<K, ElementWise>) {
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = apply(k, x.data[i]);
          } else if constexpr (std::is_same_v<K, Shift>) {
            shift(k, inst.inputs[0], din, x, out);
          } else if constexpr (std::is_same_v<K, Unfold>) {
            unfold(k, inst.inputs[0], din, x, out);
          } else if constexpr (std::is_same_v<K, FullyConnected>) {
            fc(k, inst.inputs[0], din, x, out);
          } else if constexpr (std::is_same_v<K, Fold>) {
            fold(k, din, x, out);
          } else if constexpr (std::is_same_v<K, Softmax>) {
            softmax(k, din, x, out);
          } else if constexpr (std::is_same_v<K, Broadcast>) {
            broadcast(k, *in[1], out);
          }
        },
        inst.kind);
    for (double v : out.data) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite, mnemonic(inst.kind) + " produced a non-finite value");
      }
    }
    return out;
  }

  double apply(const Group&, double v) { return v; }

  double apply(const ElementWise& e, double v) {
    ++flops;
    switch (e.fn) {
      case ElementWiseFn::kRelu: return v > 0 ? v : 0.0;
      case ElementWiseFn::kAbs: return std::abs(v);
      case ElementWiseFn::kSin: return std::sin(v);
      case ElementWiseFn::kExp: return std::exp(v);
      case ElementWiseFn::kNeg: return -v;
    }
    return v;
  }

  void shift(const Shift& k, const Shape& s, const Dims& d, const DenseTensor& x, DenseTensor& out) {
    const std::size_t p = axis_position(s, k.axis);
    const std::int64_t outer = prod(d, 0, p), n = d[p], inner = prod(d, p + 1, d.size());
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t j = 0; j < n; ++j) {
        const std::int64_t src = j + k.offset;
        for (std::int64_t i = 0; i < inner; ++i) {
          out.data[(o * n + j) * inner + i] =
              src >= 0 && src < n ? x.data[(o * n + src) * inner + i] : 0.0;
        }
      }
    }
  }

  void unfold(const Unfold& k, const Shape& s, const Dims& d, const DenseTensor& x, DenseTensor& out) {
    const std::size_t p = axis_position(s, k.axis);
    const std::size_t nc = s.channel.size();
    const std::int64_t channels = prod(d, 0, nc);
    const std::int64_t pre = prod(d, nc, p), n = d[p], post = prod(d, p + 1, d.size());
    const std::int64_t window = a.constants.at(window_constant(k.axis));
    const std::int64_t spatial = pre * n * post;
    for (std::int64_t c = 0; c < channels; ++c) {
      for (std::int64_t w = 0; w < window; ++w) {
        double* dst = &out.data[(c * window + w) * spatial];
        const double* src = &x.data[c * spatial];
        for (std::int64_t i0 = 0; i0 < pre; ++i0) {
          for (std::int64_t j = 0; j < n; ++j) {
            const std::int64_t sj = j + w - window / 2;
            for (std::int64_t i2 = 0; i2 < post; ++i2) {
              dst[(i0 * n + j) * post + i2] = sj >= 0 && sj < n ? src[(i0 * n + sj) * post + i2] : 0.0;
            }
          }
        }
      }
    }
  }

  void fc(const FullyConnected& k, const Shape& s, const Dims& d, const DenseTensor& x, DenseTensor& out) {
    const std::size_t nc = s.channel.size();
    const std::int64_t cin = prod(d, 0, nc), spatial = prod(d, nc, d.size());
    const std::int64_t cout = out.dims[0];
    const std::int64_t groups = k.grouped ? d[0] : 1;
    const std::int64_t ipg = cin / groups, opg = cout / groups;
    auto it = weights.find(edge.output - 1);
    if (it == weights.end()) {
      throw Error(ErrorCode::kShapeMismatch, "no weights for " + mnemonic(k) + " producing n" +
                                                 std::to_string(edge.output));
    }
    const DenseTensor& w = it->second;
    if (w.dims != Dims{cout, ipg}) {
      throw Error(ErrorCode::kShapeMismatch, "weight shape mismatch for " + mnemonic(k));
    }
    for (std::int64_t o = 0; o < cout; ++o) {
      const std::int64_t base = (o / opg) * ipg;
      double* dst = &out.data[o * spatial];
      for (std::int64_t i = 0; i < ipg; ++i) {
        const double wv = w.data[o * ipg + i];
        const double* src = &x.data[(base + i) * spatial];
        for (std::int64_t s2 = 0; s2 < spatial; ++s2) {
          dst[s2] += wv * src[s2];
          ++flops;
        }
      }
    }
  }

  void fold(const Fold& k, const Dims& d, const DenseTensor& x, DenseTensor& out) {
    const std::int64_t outer = prod(d, 0, k.dim), n = d[k.dim], inner = prod(d, k.dim + 1, d.size());
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        double acc = k.mode == Fold::Mode::kAvg ? 0.0 : -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < n; ++j) {
          const double v = x.data[(o * n + j) * inner + i];
          acc = k.mode == Fold::Mode::kAvg ? acc + v : std::max(acc, v);
        }
        out.data[o * inner + i] = k.mode == Fold::Mode::kAvg ? acc / static_cast<double>(n) : acc;
        ++flops;
      }
    }
  }

  void softmax(const Softmax& k, const Dims& d, const DenseTensor& x, DenseTensor& out) {
    const std::int64_t outer = prod(d, 0, k.first), n = prod(d, k.first, k.last + 1),
                       inner = prod(d, k.last + 1, d.size());
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        auto at = [&](std::int64_t j) { return (o * n + j) * inner + i; };
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < n; ++j) mx = std::max(mx, x.data[at(j)]);
        double sum = 0;
        for (std::int64_t j = 0; j < n; ++j) {
          out.data[at(j)] = std::exp(x.data[at(j)] - mx);
          sum += out.data[at(j)];
        }
        for (std::int64_t j = 0; j < n; ++j) {
          out.data[at(j)] /= sum;
          flops += 3;
        }
      }
    }
  }

  void broadcast(const Broadcast& k, const DenseTensor& rhs, DenseTensor& out) {
    const auto m = match_broadcast(edge.inst.inputs[0], edge.inst.inputs[1]);
    if (!m) throw Error(ErrorCode::kShapeMismatch, "blend shapes do not match");
    const Dims dr = eval(edge.inst.inputs[1], a);
    const std::size_t core_end = dr.size() - m->suffix_len;
    const std::int64_t p_sz = prod(dr, 0, m->prefix_len);
    const std::int64_t r_sz = prod(dr, m->prefix_len, core_end);
    const std::int64_t s_sz = prod(dr, core_end, dr.size());
    std::int64_t l_sz = 1;
    for (const auto& dim : m->lhs_core) l_sz *= eval(dim, a);
    if (r_sz % l_sz != 0) throw Error(ErrorCode::kNonIntegral, "blend ratio is not integral");
    const DenseTensor& x = *lhs_ptr_;
    for (std::int64_t p = 0; p < p_sz; ++p) {
      for (std::int64_t r = 0; r < r_sz; ++r) {
        for (std::int64_t s = 0; s < s_sz; ++s) {
          const double b = rhs.data[(p * r_sz + r) * s_sz + s];
          const double l = x.data[(p * l_sz + r % l_sz) * s_sz + s];
          double v = 0;
          switch (k.op) {
            case BroadcastOp::kAdd: v = b + l; break;
            case BroadcastOp::kSub: v = b - l; break;
            case BroadcastOp::kMul: v = b * l; break;
            case BroadcastOp::kMin: v = std::min(b, l); break;
            case BroadcastOp::kMax: v = std::max(b, l); break;
          }
          out.data[(p * r_sz + r) * s_sz + s] = v;
          ++flops;
        }
      }
    }
  }

  const DenseTensor* lhs_ptr_ = nullptr;
};

}  // namespace

DenseTensor::DenseTensor(std::vector<std::int64_t> d, double fill)
    : dims(std::move(d)), data(volume(dims), fill) {}

std::size_t DenseTensor::volume(std::span<const std::int64_t> dims) {
  std::size_t v = 1;
  for (auto d : dims) {
    if (d < 1) throw Error(ErrorCode::kInvalidArgument, "tensor dims must be positive");
    v *= static_cast<std::size_t>(d);
  }
  return v;
}

ExecResult execute(const KernelTemplate& t, const Assignment& a, const WeightMap& weights,
                   const DenseTensor& input) {
  const Dims in_dims = eval(t.dag.shape(0), a);
  if (input.dims != in_dims) {
    throw Error(ErrorCode::kShapeMismatch, "input tensor dims do not match " + t.dag.shape(0).render());
  }
  ExecResult res;
  std::vector<DenseTensor> values(t.dag.num_nodes());
  values[0] = input;
  for (const auto& e : t.dag.edges()) {
    std::vector<const DenseTensor*> in;
    for (auto id : e.inputs) in.push_back(&values[id]);
    EdgeRunner runner{e, a, weights, res.flops};
    runner.lhs_ptr_ = in[0];
    values[e.output] = runner.run(in);
  }
  res.output = std::move(values[t.output_node]);
  return res;
}

ExecResult execute(const ConcreteKernel& k, std::span<const WeightMap> weights,
                   const DenseTensor& input) {
  if (weights.size() != static_cast<std::size_t>(k.replicas)) {
    throw Error(ErrorCode::kShapeMismatch, "need one weight map per replica");
  }
  const std::int64_t c = k.assignment.constants.at(Constant::kC);
  const std::int64_t h = k.assignment.constants.at(Constant::kH);
  const std::int64_t w = k.assignment.constants.at(Constant::kW);
  const std::int64_t plane = h * w;
  if (k.mode != ReplicaMode::kSum) {
    if (input.dims != Dims{c, h, w}) throw Error(ErrorCode::kShapeMismatch, "input must be [C,H,W]");
    ExecResult res;
    res.output = DenseTensor({c * k.replicas, h, w});
    for (std::int64_t r = 0; r < k.replicas; ++r) {
      auto part = execute(k.tmpl, k.assignment, weights[static_cast<std::size_t>(r)], input);
      std::copy(part.output.data.begin(), part.output.data.end(),
                res.output.data.begin() + r * c * plane);
      res.flops += part.flops;
    }
    return res;
  }
  if (input.dims != Dims{c * k.replicas, h, w}) {
    throw Error(ErrorCode::kShapeMismatch, "input must be [r*C,H,W]");
  }
  ExecResult res;
  res.output = DenseTensor({c, h, w});
  for (std::int64_t r = 0; r < k.replicas; ++r) {
    DenseTensor chunk({c, h, w});
    std::copy(input.data.begin() + r * c * plane, input.data.begin() + (r + 1) * c * plane,
              chunk.data.begin());
    auto part = execute(k.tmpl, k.assignment, weights[static_cast<std::size_t>(r)], chunk);
    res.flops += part.flops;
    for (std::size_t i = 0; i < res.output.size(); ++i) {
      res.output.data[i] += part.output.data[i];
      if (r > 0) ++res.flops;
    }
  }
  return res;
}

std::map<std::size_t, std::vector<std::int64_t>> weight_shapes(const KernelTemplate& t,
                                                               const Assignment& a) {
  std::map<std::size_t, std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < t.dag.edges().size(); ++i) {
    const auto& e = t.dag.edges()[i];
    const auto* fc = std::get_if<FullyConnected>(&e.inst.kind);
    if (!fc) continue;
    const Dims d = eval(e.inst.inputs[0], a);
    const std::int64_t cin = prod(d, 0, e.inst.inputs[0].channel.size());
    const std::int64_t groups = fc->grouped ? d[0] : 1;
    out[i] = {eval(fc->output, a), cin / groups};
  }
  return out;
}

DenseTensor random_tensor(std::vector<std::int64_t> dims, std::mt19937_64& rng) {
  DenseTensor t(std::move(dims));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : t.data) v = u(rng);
  return t;
}

WeightMap random_weights(const KernelTemplate& t, const Assignment& a, std::mt19937_64& rng) {
  WeightMap w;
  for (auto& [edge, dims] : weight_shapes(t, a)) w[edge] = random_tensor(dims, rng);
  return w;
}

DenseTensor direct_conv(const DenseTensor& input, const DenseTensor& filter, std::int64_t groups) {
  const std::int64_t cin = input.dims[0], h = input.dims[1], w = input.dims[2];
  const std::int64_t cout = filter.dims[0], ipg = filter.dims[1], kh = filter.dims[2], kw = filter.dims[3];
  if (ipg * groups != cin || cout % groups != 0) {
    throw Error(ErrorCode::kShapeMismatch, "filter does not match input channels and groups");
  }
  const std::int64_t opg = cout / groups;
  DenseTensor out({cout, h, w});
  for (std::int64_t o = 0; o < cout; ++o) {
    const std::int64_t g = o / opg;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        double acc = 0;
        for (std::int64_t ci = 0; ci < ipg; ++ci) {
          const std::int64_t c = g * ipg + ci;
          for (std::int64_t dy = 0; dy < kh; ++dy) {
            const std::int64_t sy = y + dy - kh / 2;
            if (sy < 0 || sy >= h) continue;
            for (std::int64_t dx = 0; dx < kw; ++dx) {
              const std::int64_t sx = x + dx - kw / 2;
              if (sx < 0 || sx >= w) continue;
              acc += filter.data[((o * ipg + ci) * kh + dy) * kw + dx] * input.data[(c * h + sy) * w + sx];
            }
          }
        }
        out.data[(o * h + y) * w + x] = acc;
      }
    }
  }
  return out;
}

double equivalence_check(const ConcreteKernel& k, ConvOracle oracle, int trials, std::uint64_t seed) {
  const auto& edges = k.tmpl.dag.edges();
  std::size_t fc_index = edges.size();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& kind = edges[i].inst.kind;
    if (std::holds_alternative<FullyConnected>(kind)) {
      if (fc_index != edges.size()) throw Error(ErrorCode::kInvalidArgument, "kernel has several FC edges");
      fc_index = i;
    } else if (!std::holds_alternative<Group>(kind) && !std::holds_alternative<Unfold>(kind)) {
      throw Error(ErrorCode::kInvalidArgument, "oracle kernels may only rearrange before one FC");
    }
  }
  if (fc_index == edges.size()) throw Error(ErrorCode::kInvalidArgument, "kernel has no FC edge");
  if (k.replicas != 1) throw Error(ErrorCode::kInvalidArgument, "oracle check needs an unreplicated kernel");

  const Edge& e = edges[fc_index];
  const auto& fc = std::get<FullyConnected>(e.inst.kind);
  const Shape& in = e.inst.inputs[0];
  const Assignment& a = k.assignment;
  const Dims d = eval(in, a);
  const std::int64_t c = a.constants.at(Constant::kC);
  const std::int64_t groups = fc.grouped ? d[0] : 1;
  switch (oracle) {
    case ConvOracle::kDirect:
      if (groups != 1) throw Error(ErrorCode::kInvalidArgument, "direct oracle needs a dense FC");
      break;
    case ConvOracle::kGrouped:
      if (groups < 2) throw Error(ErrorCode::kInvalidArgument, "grouped oracle needs a grouped FC");
      break;
    case ConvOracle::kDepthwise:
      if (groups != c) throw Error(ErrorCode::kInvalidArgument, "depthwise oracle needs C groups");
      break;
  }

  // Position of every FC input channel in (channel, kh, kw) space.
  const Dimension kh_dim = Dimension::of(Constant::kKH), kw_dim = Dimension::of(Constant::kKW);
  std::int64_t kh = 1, kw = 1;
  for (const auto& dim : in.channel) {
    if (dim == kh_dim) kh = eval(dim, a);
    if (dim == kw_dim) kw = eval(dim, a);
  }
  const std::int64_t cin = prod(d, 0, in.channel.size());
  std::vector<std::int64_t> map_c(static_cast<std::size_t>(cin)), map_h(map_c.size()), map_w(map_c.size());
  for (std::int64_t i = 0; i < cin; ++i) {
    std::int64_t rem = i, ch = 0, yh = 0, xw = 0, stride = cin;
    for (std::size_t j = 0; j < in.channel.size(); ++j) {
      stride /= d[j];
      const std::int64_t digit = rem / stride;
      rem %= stride;
      if (in.channel[j] == kh_dim) {
        yh = digit;
      } else if (in.channel[j] == kw_dim) {
        xw = digit;
      } else {
        ch = ch * d[j] + digit;
      }
    }
    map_c[static_cast<std::size_t>(i)] = ch;
    map_h[static_cast<std::size_t>(i)] = yh;
    map_w[static_cast<std::size_t>(i)] = xw;
  }

  std::mt19937_64 rng(seed);
  double worst = 0;
  const std::int64_t cout = eval(fc.output, a);
  const std::int64_t ipg_conv = c / groups;
  const std::int64_t ipg_fc = cin / groups;
  for (int trial = 0; trial < trials; ++trial) {
    WeightMap w = random_weights(k.tmpl, a, rng);
    const DenseTensor& fw = w.at(fc_index);
    DenseTensor filter({cout, ipg_conv, kh, kw});
    for (std::int64_t o = 0; o < cout; ++o) {
      const std::int64_t g = o / (cout / groups);
      for (std::int64_t i = 0; i < ipg_fc; ++i) {
        const auto gi = static_cast<std::size_t>(g * ipg_fc + i);
        const std::int64_t cl = map_c[gi] - g * ipg_conv;
        filter.data[((o * ipg_conv + cl) * kh + map_h[gi]) * kw + map_w[gi]] = fw.data[o * ipg_fc + i];
      }
    }
    const DenseTensor x = random_tensor(eval(k.tmpl.dag.shape(0), a), rng);
    const auto got = execute(k.tmpl, a, w, x);
    const auto want = direct_conv(x, filter, groups);
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst = std::max(worst, std::abs(got.output.data[i] - want.data[i]));
    }
  }
  return worst;
}

DenseTensor read_tensor_text(const std::string& text, std::vector<std::int64_t> dims) {
  DenseTensor t(std::move(dims));
  std::istringstream in(text);
  std::size_t i = 0;
  double v = 0;
  while (in >> v) {
    if (i >= t.size()) throw Error(ErrorCode::kParse, "too many values for tensor");
    t.data[i++] = v;
  }
  if (!in.eof()) throw Error(ErrorCode::kParse, "bad number in tensor text");
  if (i != t.size()) {
    throw Error(ErrorCode::kParse, "expected " + std::to_string(t.size()) + " values, got " + std::to_string(i));
  }
  return t;
}

std::string write_tensor_text(const DenseTensor& t) {
  std::ostringstream out;
  out.precision(17);
  const std::int64_t row = t.dims.empty() ? 1 : t.dims.back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.data[i] << ((static_cast<std::int64_t>(i) + 1) % row == 0 ? '\n' : ' ');
  }
  return out.str();
}

}  // namespace canvas
