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

#include "canvas/primitive.hpp"

#include <algorithm>
#include <charconv>

#include "canvas/error.hpp"

namespace canvas {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void not_applicable(const PrimitiveKind& kind, const Shape& s, const std::string& why) {
  throw Error(ErrorCode::kNotApplicable, mnemonic(kind) + " on " + s.render() + ": " + why);
}

std::optional<std::size_t> find_axis(const Shape& s, Axis axis) {
  const Dimension target = Dimension::of(axis_constant(axis));
  for (std::size_t i = 0; i < s.spatial.size(); ++i) {
    if (s.spatial[i] == target) return i;
  }
  return std::nullopt;
}

bool groupable_by_g(const Dimension& d) {
  if (d.has_variable()) return true;
  const auto& m = d.monomial();
  // G is present in the divisibility numerator (C counts, being G * C/G).
  return m.exponent(Constant::kG) + m.exponent(Constant::kC) >= 1 && m.divides_evenly();
}

bool legal_group_count(const Dimension& a) {
  return !a.has_variable() && !a.is_one() && a.monomial().divides_evenly();
}

std::int64_t product(const std::vector<std::int64_t>& v, std::size_t begin, std::size_t end) {
  std::int64_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= v[i];
  return p;
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

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "bad index '" + std::string(s) + "'");
  }
  return v;
}

[[noreturn]] void bad_mnemonic(std::string_view text) {
  throw Error(ErrorCode::kParse, "unknown primitive '" + std::string(text) + "'");
}

}  // namespace

std::string_view class_name(PrimitiveClass c) {
  switch (c) {
    case PrimitiveClass::kGroup: return "group";
    case PrimitiveClass::kShift: return "shift";
    case PrimitiveClass::kUnfold: return "unfold";
    case PrimitiveClass::kFullyConnected: return "fc";
    case PrimitiveClass::kElementWise: return "ew";
    case PrimitiveClass::kFold: return "fold";
    case PrimitiveClass::kSoftmax: return "softmax";
    case PrimitiveClass::kBroadcast: return "bcast";
  }
  return "?";
}

std::optional<PrimitiveClass> parse_class(std::string_view name) {
  for (auto c : kAllPrimitiveClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view axis_name(Axis a) { return a == Axis::kH ? "h" : "w"; }
Constant axis_constant(Axis a) { return a == Axis::kH ? Constant::kH : Constant::kW; }
Constant window_constant(Axis a) { return a == Axis::kH ? Constant::kKH : Constant::kKW; }

PrimitiveClass primitive_class(const PrimitiveKind& kind) {
  return static_cast<PrimitiveClass>(kind.index());
}

std::size_t arity(const PrimitiveKind& kind) {
  return std::holds_alternative<Broadcast>(kind) ? 2 : 1;
}

std::string mnemonic(const PrimitiveKind& kind) {
  return std::visit(
      Overloaded{
          [](const Group& g) {
            std::string s = g.mode == Group::Mode::kByG ? "group(G" : "group(each";
            if (g.dim != 0) s += ",dim=" + std::to_string(g.dim);
            return s + ")";
          },
          [](const Shift& s) {
            return "shift(" + std::string(axis_name(s.axis)) + (s.offset > 0 ? ",+" : ",") +
                   std::to_string(s.offset) + ")";
          },
          [](const Unfold& u) { return "unfold(" + std::string(axis_name(u.axis)) + ")"; },
          [](const FullyConnected& f) {
            return "fc(" + f.output.render() + (f.grouped ? ",grouped)" : ")");
          },
          [](const ElementWise& e) { return "ew(" + std::string(ew_name(e.fn)) + ")"; },
          [](const Fold& f) {
            return "fold(dim=" + std::to_string(f.dim) +
                   (f.mode == Fold::Mode::kAvg ? ",avg)" : ",max)");
          },
          [](const Softmax& s) {
            return "softmax(" + std::to_string(s.first) + ".." + std::to_string(s.last) + ")";
          },
          [](const Broadcast& b) { return "bcast(" + std::string(op_name(b.op)) + ")"; },
      },
      kind);
}

PrimitiveKind parse_mnemonic(std::string_view text) {
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') bad_mnemonic(text);
  const auto name = text.substr(0, open);
  const auto args = text.substr(open + 1, text.size() - open - 2);
  // Split on the first comma only; fc outputs never contain commas.
  const auto comma = args.find(',');
  const auto a0 = args.substr(0, comma);
  const auto a1 = comma == std::string_view::npos ? std::string_view{} : args.substr(comma + 1);

  if (name == "group") {
    Group g;
    if (a0 == "G") {
      g.mode = Group::Mode::kByG;
    } else if (a0 == "each") {
      g.mode = Group::Mode::kEach;
    } else {
      bad_mnemonic(text);
    }
    if (!a1.empty()) {
      if (a1.substr(0, 4) != "dim=") bad_mnemonic(text);
      g.dim = parse_index(a1.substr(4));
    }
    return g;
  }
  if (name == "shift") {
    Shift s;
    if (a0 == "h") {
      s.axis = Axis::kH;
    } else if (a0 == "w") {
      s.axis = Axis::kW;
    } else {
      bad_mnemonic(text);
    }
    if (a1 == "+1") {
      s.offset = 1;
    } else if (a1 == "-1") {
      s.offset = -1;
    } else {
      bad_mnemonic(text);
    }
    return s;
  }
  if (name == "unfold") {
    if (a0 == "h" && a1.empty()) return Unfold{Axis::kH};
    if (a0 == "w" && a1.empty()) return Unfold{Axis::kW};
    bad_mnemonic(text);
  }
  if (name == "fc") {
    FullyConnected f{parse_dimension(a0), false};
    if (a1 == "grouped") {
      f.grouped = true;
    } else if (!a1.empty()) {
      bad_mnemonic(text);
    }
    return f;
  }
  if (name == "ew") {
    for (auto fn : kAllElementWiseFns) {
      if (ew_name(fn) == a0 && a1.empty()) return ElementWise{fn};
    }
    bad_mnemonic(text);
  }
  if (name == "fold") {
    if (a0.substr(0, 4) != "dim=") bad_mnemonic(text);
    Fold f;
    f.dim = parse_index(a0.substr(4));
    if (a1 == "avg") {
      f.mode = Fold::Mode::kAvg;
    } else if (a1 == "max") {
      f.mode = Fold::Mode::kMax;
    } else {
      bad_mnemonic(text);
    }
    return f;
  }
  if (name == "softmax") {
    auto dots = args.find("..");
    if (dots == std::string_view::npos) bad_mnemonic(text);
    return Softmax{parse_index(args.substr(0, dots)), parse_index(args.substr(dots + 2))};
  }
  if (name == "bcast") {
    for (auto op : kAllBroadcastOps) {
      if (op_name(op) == a0 && a1.empty()) return Broadcast{op};
    }
    bad_mnemonic(text);
  }
  bad_mnemonic(text);
}

Shape output_shape(const PrimitiveKind& kind, std::span<const Shape> inputs) {
  if (inputs.size() != arity(kind)) {
    throw Error(ErrorCode::kShapeMismatch, mnemonic(kind) + " expects " +
                                               std::to_string(arity(kind)) + " input(s), got " +
                                               std::to_string(inputs.size()));
  }
  const Shape& s = inputs[0];
  return std::visit(
      Overloaded{
          [&](const Group& g) {
            if (g.dim >= s.channel.size()) not_applicable(kind, s, "no such channel dim");
            const Dimension& d = s.channel[g.dim];
            Shape out = s;
            auto pos = out.channel.begin() + static_cast<std::ptrdiff_t>(g.dim);
            if (g.mode == Group::Mode::kByG) {
              if (!groupable_by_g(d)) not_applicable(kind, s, "dim not divisible by G");
              *pos = divide(d, Dimension::of(Constant::kG));
              out.channel.insert(pos, Dimension::of(Constant::kG));
            } else {
              if (d.is_one()) not_applicable(kind, s, "dim already 1");
              out.channel.insert(pos + 1, Dimension{});
            }
            return out;
          },
          [&](const Shift& sh) {
            if (!find_axis(s, sh.axis)) not_applicable(kind, s, "axis absent");
            if (sh.offset != 1 && sh.offset != -1) not_applicable(kind, s, "offset must be +-1");
            return s;
          },
          [&](const Unfold& u) {
            if (!find_axis(s, u.axis)) not_applicable(kind, s, "axis absent");
            Shape out = s;
            out.channel.push_back(Dimension::of(window_constant(u.axis)));
            return out;
          },
          [&](const FullyConnected& f) {
            if (f.grouped) {
              if (s.channel.empty() || !legal_group_count(s.channel[0])) {
                not_applicable(kind, s, "first channel dim is not a group count");
              }
              const Monomial q = f.output.monomial() / s.channel[0].monomial();
              if (!f.output.has_variable() && !q.divides_evenly()) {
                not_applicable(kind, s, "output not divisible by group count");
              }
            }
            Shape out;
            out.channel = {f.output};
            out.spatial = s.spatial;
            return out;
          },
          [&](const ElementWise&) { return s; },
          [&](const Fold& f) {
            if (f.dim >= s.rank()) not_applicable(kind, s, "no such dim");
            Shape out = s;
            if (f.dim < s.channel.size()) {
              out.channel.erase(out.channel.begin() + static_cast<std::ptrdiff_t>(f.dim));
            } else {
              out.spatial.erase(out.spatial.begin() +
                                static_cast<std::ptrdiff_t>(f.dim - s.channel.size()));
            }
            return out;
          },
          [&](const Softmax& sm) {
            if (sm.first > sm.last || sm.last >= s.channel.size()) {
              not_applicable(kind, s, "range outside channel dims");
            }
            return s;
          },
          [&](const Broadcast&) {
            auto m = match_broadcast(inputs[0], inputs[1]);
            if (!m || !m->legal_without_substitution) {
              throw Error(ErrorCode::kNotApplicable, mnemonic(kind) + " from " +
                                                         inputs[0].render() + " to " +
                                                         inputs[1].render() + ": no legal match");
            }
            return inputs[1];
          },
      },
      kind);
}

PrimitiveInstance make_instance(PrimitiveKind kind, std::vector<Shape> inputs) {
  Shape out = output_shape(kind, inputs);
  return PrimitiveInstance{std::move(kind), std::move(inputs), std::move(out)};
}

std::vector<PrimitiveKind> applicable_unary(const Shape& s, VariableId fresh) {
  std::vector<PrimitiveKind> out;
  for (std::size_t i = 0; i < s.channel.size(); ++i) {
    if (groupable_by_g(s.channel[i])) out.emplace_back(Group{Group::Mode::kByG, i});
    if (!s.channel[i].is_one()) out.emplace_back(Group{Group::Mode::kEach, i});
  }
  for (auto axis : {Axis::kH, Axis::kW}) {
    if (!find_axis(s, axis)) continue;
    out.emplace_back(Shift{axis, 1});
    out.emplace_back(Shift{axis, -1});
  }
  for (auto axis : {Axis::kH, Axis::kW}) {
    if (find_axis(s, axis)) out.emplace_back(Unfold{axis});
  }
  out.emplace_back(FullyConnected{Dimension::of(fresh), false});
  if (!s.channel.empty() && legal_group_count(s.channel[0])) {
    out.emplace_back(FullyConnected{Dimension::of(fresh), true});
  }
  for (auto fn : kAllElementWiseFns) out.emplace_back(ElementWise{fn});
  for (std::size_t i = 0; i < s.rank(); ++i) {
    out.emplace_back(Fold{i, Fold::Mode::kAvg});
    out.emplace_back(Fold{i, Fold::Mode::kMax});
  }
  for (std::size_t a = 0; a < s.channel.size(); ++a) {
    for (std::size_t b = a; b < s.channel.size(); ++b) out.emplace_back(Softmax{a, b});
  }
  return out;
}

std::vector<BlendCandidate> applicable_blends(const Shape& lhs, const Shape& rhs) {
  std::vector<BlendCandidate> out;
  auto m = match_broadcast(lhs, rhs);
  if (!m) return out;
  for (auto op : kAllBroadcastOps) out.push_back({Broadcast{op}, *m});
  return out;
}

Cost cost(const PrimitiveInstance& inst, const Assignment& a) {
  const auto out_dims = eval(inst.output, a);
  const std::int64_t out_elems = product(out_dims, 0, out_dims.size());
  return std::visit(
      Overloaded{
          [&](const FullyConnected& f) {
            const Shape& in = inst.inputs[0];
            const auto dims = eval(in, a);
            const std::int64_t in_ch = product(dims, 0, in.channel.size());
            const std::int64_t spatial = product(dims, in.channel.size(), dims.size());
            const std::int64_t out_ch = eval(f.output, a);
            const std::int64_t groups = f.grouped ? dims[0] : 1;
            if (out_ch % groups != 0 || in_ch % groups != 0) {
              throw Error(ErrorCode::kNonIntegral,
                          mnemonic(f) + ": channels not divisible by groups under " + render(a));
            }
            const std::int64_t params = out_ch * (in_ch / groups);
            return Cost{params * spatial, params};
          },
          [&](const ElementWise&) { return Cost{out_elems, 0}; },
          [&](const Fold&) { return Cost{out_elems, 0}; },
          [&](const Softmax&) { return Cost{3 * out_elems, 0}; },
          [&](const Broadcast&) { return Cost{out_elems, 0}; },
          [&](const auto&) { return Cost{}; },
      },
      inst.kind);
}

}  // namespace canvas
