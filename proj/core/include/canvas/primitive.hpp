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

// The fine-grained primitive library.
//
// Rearrangement: group, shift, unfold. Arithmetic: fc, ew, fold, softmax.
// Blend: bcast. All dims are addressed by flat index over channel ++ spatial
// except shift and unfold, which name a spatial axis.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "canvas/shape_algebra.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas {

enum class PrimitiveClass : std::uint8_t {
  kGroup,
  kShift,
  kUnfold,
  kFullyConnected,
  kElementWise,
  kFold,
  kSoftmax,
  kBroadcast,
};
inline constexpr std::size_t kNumPrimitiveClasses = 8;
inline constexpr std::array<PrimitiveClass, kNumPrimitiveClasses> kAllPrimitiveClasses = {
    PrimitiveClass::kGroup,          PrimitiveClass::kShift,
    PrimitiveClass::kUnfold,         PrimitiveClass::kFullyConnected,
    PrimitiveClass::kElementWise,    PrimitiveClass::kFold,
    PrimitiveClass::kSoftmax,        PrimitiveClass::kBroadcast};

// "group", "shift", "unfold", "fc", "ew", "fold", "softmax", "bcast".
std::string_view class_name(PrimitiveClass c);
std::optional<PrimitiveClass> parse_class(std::string_view name);

// Spatial axes are named, not indexed: folds may remove H or W, and the
// unfold window size depends on which one is left.
enum class Axis : std::uint8_t { kH, kW };

struct Group {
  enum class Mode : std::uint8_t { kByG, kEach };
  Mode mode = Mode::kByG;
  std::size_t dim = 0;  // channel index
  friend bool operator==(const Group&, const Group&) = default;
};

struct Shift {
  Axis axis = Axis::kH;
  int offset = 1;  // +1 or -1
  friend bool operator==(const Shift&, const Shift&) = default;
};

// Appends K_H or K_W as the last channel dim.
struct Unfold {
  Axis axis = Axis::kH;
  friend bool operator==(const Unfold&, const Unfold&) = default;
};

// Replaces all channel dims with [output]. When `grouped` is set the first
// input channel dim A is the group count: every group maps prod(channel)/A
// inputs to output/A outputs.
struct FullyConnected {
  Dimension output;
  bool grouped = false;
  friend bool operator==(const FullyConnected&, const FullyConnected&) = default;
};

enum class ElementWiseFn : std::uint8_t { kRelu, kAbs, kSin, kExp, kNeg };
inline constexpr std::array<ElementWiseFn, 5> kAllElementWiseFns = {
    ElementWiseFn::kRelu, ElementWiseFn::kAbs, ElementWiseFn::kSin,
    ElementWiseFn::kExp, ElementWiseFn::kNeg};

struct ElementWise {
  ElementWiseFn fn = ElementWiseFn::kRelu;
  friend bool operator==(const ElementWise&, const ElementWise&) = default;
};

struct Fold {
  enum class Mode : std::uint8_t { kAvg, kMax };
  std::size_t dim = 0;  // flat index
  Mode mode = Mode::kAvg;
  friend bool operator==(const Fold&, const Fold&) = default;
};

// Normalizes jointly over the channel dims first..last (inclusive).
struct Softmax {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const Softmax&, const Softmax&) = default;
};

enum class BroadcastOp : std::uint8_t { kAdd, kSub, kMul, kMin, kMax };
inline constexpr std::array<BroadcastOp, 5> kAllBroadcastOps = {
    BroadcastOp::kAdd, BroadcastOp::kSub, BroadcastOp::kMul, BroadcastOp::kMin,
    BroadcastOp::kMax};

// Inputs are (lhs, rhs); the output takes the RHS shape and `sub` computes
// rhs - lhs.
struct Broadcast {
  BroadcastOp op = BroadcastOp::kAdd;
  friend bool operator==(const Broadcast&, const Broadcast&) = default;
};

using PrimitiveKind =
    std::variant<Group, Shift, Unfold, FullyConnected, ElementWise, Fold, Softmax, Broadcast>;

PrimitiveClass primitive_class(const PrimitiveKind& kind);
std::size_t arity(const PrimitiveKind& kind);

// Canonical mnemonics: group(G), group(each,dim=1), shift(h,+1), unfold(w),
// fc(x1), fc(C,grouped), ew(relu), fold(dim=2,avg), softmax(0..1), bcast(mul).
std::string mnemonic(const PrimitiveKind& kind);
PrimitiveKind parse_mnemonic(std::string_view text);

std::string_view axis_name(Axis a);
Constant axis_constant(Axis a);
Constant window_constant(Axis a);

// Throws Error(kNotApplicable) or Error(kShapeMismatch) on arity mismatch.
Shape output_shape(const PrimitiveKind& kind, std::span<const Shape> inputs);

struct PrimitiveInstance {
  PrimitiveKind kind;
  std::vector<Shape> inputs;
  Shape output;

  friend bool operator==(const PrimitiveInstance&, const PrimitiveInstance&) = default;
};

PrimitiveInstance make_instance(PrimitiveKind kind, std::vector<Shape> inputs);

// Every single-input primitive applicable to `s`. FC candidates introduce
// `fresh`; a grouped FC is offered when the first channel dim is a legal
// group count.
std::vector<PrimitiveKind> applicable_unary(const Shape& s, VariableId fresh);

struct BlendCandidate {
  Broadcast kind;
  BroadcastMatch match;
};

std::vector<BlendCandidate> applicable_blends(const Shape& lhs, const Shape& rhs);

struct Cost {
  std::int64_t flops = 0;
  std::int64_t params = 0;

  Cost& operator+=(const Cost& o) {
    flops += o.flops;
    params += o.params;
    return *this;
  }
  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  friend Cost operator*(Cost a, std::int64_t r) { return {a.flops * r, a.params * r}; }
  friend bool operator==(const Cost&, const Cost&) = default;
};

// One MAC counts as one FLOP. ew/fold/bcast cost one FLOP per output element,
// softmax three; group/shift/unfold are free. Only FC holds parameters.
Cost cost(const PrimitiveInstance& inst, const Assignment& a);

}  // namespace canvas
