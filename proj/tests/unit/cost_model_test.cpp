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

#include <gtest/gtest.h>

#include "canvas/error.hpp"
#include "fixtures.hpp"

namespace canvas {
namespace {

using testing::group_window_backbone;
using testing::group_window_template;
using testing::make_target;

const VariableId x1{1};

MicroDag double_unfold_fc() {
  MicroDag g = MicroDag::input_only();
  g = g.grow(Unfold{Axis::kH}, {0});
  g = g.grow(Unfold{Axis::kW}, {1});
  return g.grow(FullyConnected{parse_dimension("C"), false}, {2});
}

TEST(TemplateCostTest, SumsPrimitiveCosts) {
  const Assignment a = parse_assignment("C=1,H=1,KH=3,KW=3,W=1");
  EXPECT_EQ(template_cost(double_unfold_fc(), a), (Cost{9, 9}));
  const Assignment b = parse_assignment("C=4,H=5,KH=3,KW=3,W=6");
  EXPECT_EQ(template_cost(double_unfold_fc(), b), (Cost{4 * 36 * 30, 4 * 36}));
  EXPECT_EQ(template_cost(MicroDag::input_only(), b), Cost{});
}

TEST(KernelCostTest, Replication) {
  const KernelTemplate t = finalize(double_unfold_fc());
  const Target same = make_target("s", 4, 4, 5, 3);
  const Target wide = make_target("w", 4, 12, 5, 3);
  const Target narrow = make_target("n", 12, 4, 5, 3);
  const Cost one = kernel_cost(make_concrete(t, same, target_constants(same, 0)));
  EXPECT_EQ(one, (Cost{4 * 36 * 25, 4 * 36}));

  const ConcreteKernel kc = make_concrete(t, wide, target_constants(wide, 0));
  EXPECT_EQ(kc.replicas, 3);
  EXPECT_EQ(kc.mode, ReplicaMode::kConcat);
  EXPECT_EQ(kernel_cost(kc), one * 3);

  const ConcreteKernel ks = make_concrete(t, narrow, target_constants(narrow, 0));
  EXPECT_EQ(ks.mode, ReplicaMode::kSum);
  EXPECT_EQ(kernel_cost(ks), one * 3 + Cost({2 * 4 * 25, 0}));

  EXPECT_THROW(make_concrete(t, make_target("bad", 3, 4, 5, 3), {}), Error);
}

TEST(BaselineTest, DenseConvolution) {
  const Target t = make_target("c", 16, 32, 8, 3);
  EXPECT_EQ(conv_baseline(t), (Cost{16 * 32 * 9 * 64, 16 * 32 * 9}));
  EXPECT_EQ(original_cost(t), conv_baseline(t));
  BackboneSpec spec;
  spec.targets = {t, t};
  spec.non_replaced_flops = 10;
  spec.non_replaced_params = 1;
  EXPECT_EQ(original_network_cost(spec), conv_baseline(t) * 2 + Cost({10, 1}));
}

TEST(NetworkCostTest, IdentityTemplateCostsOnlyTheRest) {
  BackboneSpec spec = group_window_backbone();
  spec.non_replaced_flops = 1000;
  spec.non_replaced_params = 7;
  EXPECT_EQ(network_cost(spec, finalize(MicroDag::input_only()), 4, {}), (Cost{1000, 7}));
}

TEST(NetworkCostTest, NonReplaceableKeepsOriginal) {
  BackboneSpec spec = group_window_backbone();
  spec.targets.push_back(make_target("stem", 3, 16, 8, 3));
  const VarValues x = {{{0, x1}, 12}, {{1, x1}, 60}};
  const KernelTemplate t = group_window_template();
  const Cost with = network_cost(spec, t, 4, x);
  spec.targets.pop_back();
  EXPECT_EQ(with, network_cost(spec, t, 4, x) + conv_baseline(make_target("stem", 3, 16, 8, 3)));
}

TEST(NetworkCostTest, MonotoneInEveryVariable) {
  const BackboneSpec spec = group_window_backbone();
  const KernelTemplate t = group_window_template();
  VarValues x = {{{0, x1}, 12}, {{1, x1}, 60}};
  Cost prev = network_cost(spec, t, 4, x);
  for (int i = 0; i < 6; ++i) {
    x[{static_cast<std::size_t>(i % 2), x1}] *= 2;
    const Cost c = network_cost(spec, t, 4, x);
    EXPECT_GT(c.flops, prev.flops);
    EXPECT_GT(c.params, prev.params);
    prev = c;
  }
}

TEST(NetworkReportTest, RatiosAndSpeedup) {
  const BackboneSpec spec = group_window_backbone();
  const KernelTemplate t = group_window_template();
  const VarValues x = {{{0, x1}, 12}, {{1, x1}, 60}};
  const NetworkReport r = network_report(spec, t, 4, x);
  ASSERT_EQ(r.targets.size(), 2u);
  EXPECT_TRUE(r.targets[0].replaced);
  EXPECT_EQ(r.new_total, network_cost(spec, t, 4, x));
  EXPECT_DOUBLE_EQ(r.flops_ratio, static_cast<double>(r.new_total.flops) /
                                      static_cast<double>(r.original_total.flops));
  EXPECT_DOUBLE_EQ(r.replaceable_frac, 1.0);
  EXPECT_DOUBLE_EQ(r.ideal_speedup, 1.0 / r.flops_ratio);
  EXPECT_DOUBLE_EQ(ideal_speedup(0.5, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(ideal_speedup(0.0, 0.3), 1.0);
}

}  // namespace
}  // namespace canvas
