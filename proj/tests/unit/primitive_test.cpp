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

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "canvas/error.hpp"
#include "canvas/micro_dag.hpp"

namespace canvas {
namespace {

Shape S(const char* text) { return parse_shape(text); }

Shape out1(const PrimitiveKind& k, const char* in) {
  const Shape s = S(in);
  return output_shape(k, std::span<const Shape>(&s, 1));
}

TEST(OutputShapeTest, Rearrangements) {
  EXPECT_EQ(out1(Group{Group::Mode::kByG, 0}, "[C|H,W]").render(), "[G,C/G|H,W]");
  EXPECT_EQ(out1(Group{Group::Mode::kEach, 0}, "[C|H,W]").render(), "[C,1|H,W]");
  EXPECT_EQ(out1(Unfold{Axis::kH}, "[C|H,W]").render(), "[C,KH|H,W]");
  EXPECT_EQ(out1(Unfold{Axis::kW}, "[C,KH|H,W]").render(), "[C,KH,KW|H,W]");
  EXPECT_EQ(out1(Shift{Axis::kW, -1}, "[C|H,W]").render(), "[C|H,W]");
  EXPECT_EQ(out1(Fold{1, Fold::Mode::kAvg}, "[C,KH|H,W]").render(), "[C|H,W]");
  EXPECT_EQ(out1(Fold{2, Fold::Mode::kMax}, "[C|H,W]").render(), "[C|H]");
  EXPECT_EQ(out1(Softmax{0, 1}, "[G,C/G|H,W]").render(), "[G,C/G|H,W]");
}

TEST(OutputShapeTest, FullyConnected) {
  const VariableId x1{1};
  EXPECT_EQ(out1(FullyConnected{Dimension::of(x1), false}, "[C,KH,KW|H,W]").render(), "[x1|H,W]");
  EXPECT_EQ(out1(FullyConnected{parse_dimension("C"), true}, "[G,C/G|H,W]").render(), "[C|H,W]");
  // KH is not a group count.
  EXPECT_THROW(out1(FullyConnected{parse_dimension("C"), true}, "[KH,C|H,W]"), Error);
  // KH is not divisible by G.
  EXPECT_THROW(out1(FullyConnected{parse_dimension("KH"), true}, "[G,C/G|H,W]"), Error);
}

TEST(OutputShapeTest, NotApplicable) {
  try {
    out1(Group{Group::Mode::kByG, 0}, "[KH|H,W]");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotApplicable);
  }
  EXPECT_THROW(out1(Unfold{Axis::kW}, "[C|H]"), Error);
  EXPECT_THROW(out1(Shift{Axis::kH, 2}, "[C|H,W]"), Error);
  EXPECT_THROW(out1(Fold{3, Fold::Mode::kAvg}, "[C|H,W]"), Error);
  EXPECT_THROW(out1(Softmax{0, 1}, "[C|H,W]"), Error);
  EXPECT_THROW(out1(Group{Group::Mode::kEach, 0}, "[1|H,W]"), Error);
}

TEST(OutputShapeTest, BroadcastTakesRhsShape) {
  const std::vector<Shape> in = {S("[C|H,W]"), S("[G,C/G,KH|H,W]")};
  EXPECT_EQ(output_shape(Broadcast{BroadcastOp::kMul}, in).render(), "[G,C/G,KH|H,W]");
  const std::vector<Shape> bad = {S("[C|H,W]"), S("[C|H]")};
  EXPECT_THROW(output_shape(Broadcast{BroadcastOp::kAdd}, bad), Error);
}

TEST(MnemonicTest, RoundTripsEveryApplicableKind) {
  for (const char* text : {"[C|H,W]", "[G,C/G,KH|H,W]", "[x3,KW|H]"}) {
    for (const auto& k : applicable_unary(S(text), VariableId{7})) {
      EXPECT_EQ(parse_mnemonic(mnemonic(k)), k) << mnemonic(k);
    }
  }
  for (auto op : kAllBroadcastOps) {
    const PrimitiveKind k = Broadcast{op};
    EXPECT_EQ(parse_mnemonic(mnemonic(k)), k);
  }
  EXPECT_EQ(mnemonic(Shift{Axis::kH, 1}), "shift(h,+1)");
  EXPECT_EQ(mnemonic(Group{Group::Mode::kByG, 2}), "group(G,dim=2)");
  EXPECT_EQ(mnemonic(FullyConnected{parse_dimension("C"), true}), "fc(C,grouped)");
  EXPECT_THROW(parse_mnemonic("conv(3)"), Error);
  EXPECT_THROW(parse_mnemonic("shift(h,+2)"), Error);
}

TEST(ApplicableTest, EveryCandidateSucceedsAndKeepsTheorem1) {
  std::mt19937 rng(3);
  MicroDag g = MicroDag::input_only();
  std::uint32_t next_var = 1;
  for (int step = 0; step < 400; ++step) {
    if (g.num_nodes() > 8) g = MicroDag::input_only();
    std::uniform_int_distribution<std::size_t> pick_node(0, g.num_nodes() - 1);
    const std::size_t node = pick_node(rng);
    const auto kinds = applicable_unary(g.shape(node), VariableId{next_var});
    ASSERT_FALSE(kinds.empty());
    for (const auto& k : kinds) {
      const Shape& in = g.shape(node);
      Shape out;
      ASSERT_NO_THROW(out = output_shape(k, std::span<const Shape>(&in, 1))) << mnemonic(k);
      EXPECT_TRUE(validate_theorem1(out).empty()) << mnemonic(k) << " " << out.render();
    }
    std::uniform_int_distribution<std::size_t> pick_kind(0, kinds.size() - 1);
    const auto& k = kinds[pick_kind(rng)];
    if (std::holds_alternative<FullyConnected>(k)) ++next_var;
    g = g.grow(k, {node});
  }
}

TEST(ApplicableTest, BlendsListEveryOpForALegalMatch) {
  const auto blends = applicable_blends(S("[x1|H,W]"), S("[C,KH|H,W]"));
  EXPECT_EQ(blends.size(), kAllBroadcastOps.size());
  EXPECT_TRUE(applicable_blends(S("[C|H,W]"), S("[C|H]")).empty());
}

TEST(CostTest, FcCountsMacs) {
  const Assignment a = parse_assignment("C=4,G=2,H=5,KH=3,KW=3,W=6,x1=8");
  const auto fc = make_instance(FullyConnected{parse_dimension("x1"), false}, {S("[C,KH|H,W]")});
  EXPECT_EQ(cost(fc, a), (Cost{8 * 12 * 30, 8 * 12}));
  const auto gfc = make_instance(FullyConnected{parse_dimension("C"), true}, {S("[G,C/G,KH|H,W]")});
  // 2 groups, 4 outputs over 2*2*3 inputs.
  EXPECT_EQ(cost(gfc, a), (Cost{4 * 6 * 30, 4 * 6}));
}

TEST(CostTest, OnlyFcOwnsParameters) {
  const Assignment a = parse_assignment("C=4,G=2,H=5,KH=3,KW=3,W=6");
  const Shape in = S("[G,C/G|H,W]");
  for (const auto& k : applicable_unary(in, VariableId{1})) {
    if (std::holds_alternative<FullyConnected>(k)) continue;
    const auto inst = make_instance(k, {in});
    const Cost c = cost(inst, a);
    EXPECT_EQ(c.params, 0) << mnemonic(k);
    const auto cls = primitive_class(k);
    if (cls == PrimitiveClass::kGroup || cls == PrimitiveClass::kShift ||
        cls == PrimitiveClass::kUnfold) {
      EXPECT_EQ(c.flops, 0) << mnemonic(k);
    } else {
      EXPECT_GT(c.flops, 0) << mnemonic(k);
    }
  }
}

// Unfold on both axes then FC back to C: 9 params and 9 FLOPs per element
// when C = 1. Unfold on one axis plus a shifted residual: 3 and 4.
TEST(CostTest, UnfoldPatternGolden) {
  const Assignment a = parse_assignment("C=1,G=1,H=1,KH=3,KW=3,W=1");
  const Shape in = Shape::input();
  const auto u1 = make_instance(Unfold{Axis::kH}, {in});
  const auto u2 = make_instance(Unfold{Axis::kW}, {u1.output});
  const auto fc9 = make_instance(FullyConnected{parse_dimension("C"), false}, {u2.output});
  EXPECT_EQ(cost(u1, a) + cost(u2, a) + cost(fc9, a), (Cost{9, 9}));

  const auto fc3 = make_instance(FullyConnected{parse_dimension("C"), false}, {u1.output});
  const auto sh = make_instance(Shift{Axis::kW, 1}, {in});
  const auto add = make_instance(Broadcast{BroadcastOp::kAdd}, {sh.output, fc3.output});
  EXPECT_EQ(cost(u1, a) + cost(fc3, a) + cost(sh, a) + cost(add, a), (Cost{4, 3}));
}

TEST(CostTest, NonIntegralGroups) {
  const Assignment a = parse_assignment("C=6,G=4,H=2,KH=3,KW=3,W=2");
  const auto gfc = make_instance(FullyConnected{parse_dimension("C"), true}, {S("[G,C/G|H,W]")});
  EXPECT_THROW(cost(gfc, a), Error);
}

}  // namespace
}  // namespace canvas
