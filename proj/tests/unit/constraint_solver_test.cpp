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

#include <gtest/gtest.h>

#include <random>

#include "canvas/error.hpp"
#include "fixtures.hpp"

namespace canvas {
namespace {

using testing::group_window_backbone;
using testing::group_window_template;
using testing::make_target;

const VariableId x1{1};

TEST(CandidateGTest, DivisorsOfCommonChannels) {
  BackboneSpec spec;
  spec.targets = {make_target("a", 32, 32, 8, 3), make_target("b", 48, 96, 8, 3)};
  EXPECT_EQ(candidate_G(spec), (std::vector<std::int64_t>{2, 4, 8, 16}));
  // Non-replaceable targets do not constrain G.
  spec.targets.push_back(make_target("c", 3, 64, 32, 3));
  EXPECT_EQ(candidate_G(spec), (std::vector<std::int64_t>{2, 4, 8, 16}));
}

TEST(DivisibilityLcmTest, GroupWindowTemplate) {
  const KernelTemplate t = group_window_template();
  EXPECT_TRUE(uses_group_count(t));
  const BackboneSpec spec = group_window_backbone();
  EXPECT_EQ(divisibility_lcm(t, x1, target_constants(spec.targets[0], 4)), 12);
  EXPECT_EQ(divisibility_lcm(t, x1, target_constants(spec.targets[1], 4)), 20);
}

TEST(BaseValuesTest, ScaledByChannels) {
  const KernelTemplate t = group_window_template();
  const VarValues base = base_values(t, group_window_backbone(), 4);
  EXPECT_EQ(base.at({0, x1}), 12);
  EXPECT_EQ(base.at({1, x1}), 60);
}

// [G] pooled and blended into [x1]: lcm = G.
KernelTemplate group_only_template() {
  MicroDag g = MicroDag::input_only();
  g = g.grow(Group{Group::Mode::kByG, 0}, {0});
  g = g.grow(Fold{1, Fold::Mode::kMax}, {1});
  g = g.grow(FullyConnected{Dimension::of(x1), false}, {0});
  g = g.grow(Broadcast{BroadcastOp::kMul}, {2, 3});
  g = g.grow(FullyConnected{parse_dimension("C"), false}, {4});
  return finalize(std::move(g));
}

TEST(BaseValuesTest, MatchesBruteForceMinimum) {
  const KernelTemplate t = group_only_template();
  BackboneSpec spec;
  spec.targets = {make_target("a", 16, 16, 4, 3), make_target("b", 32, 32, 4, 3)};
  const VarValues base = base_values(t, spec, 4);
  EXPECT_EQ(base.at({0, x1}), 4);
  EXPECT_EQ(base.at({1, x1}), 8);
  // Smallest legal value of at least C_i / C_1 * x_1.
  for (std::size_t i = 0; i < 2; ++i) {
    const std::int64_t floor_value = spec.targets[i].c_in / 16 * base.at({0, x1});
    std::int64_t v = floor_value;
    for (;; ++v) {
      VarValues x = base;
      x[{i, x1}] = v;
      if (!check_integral(t, spec, 4, x)) break;
    }
    EXPECT_EQ(base.at({i, x1}), v) << i;
  }
}

TEST(MaximizeTest, TwoDoublings) {
  const KernelTemplate t = group_window_template();
  const BackboneSpec spec = group_window_backbone();
  const VarValues want = {{{0, x1}, 48}, {{1, x1}, 240}};
  Budget budget;
  budget.max_flops = network_cost(spec, t, 4, want).flops;
  SolveOptions opts;
  opts.g = 4;
  const SolveResult r = solve(t, spec, budget, opts);
  ASSERT_TRUE(std::holds_alternative<Solution>(r));
  const auto& sol = std::get<Solution>(r);
  EXPECT_EQ(sol.g, 4);
  EXPECT_EQ(sol.x, want);
  EXPECT_EQ(sol.status, "ok");
  EXPECT_EQ(sol.achieved, network_cost(spec, t, 4, want));
}

TEST(MaximizeTest, DiscardsWhenBaseExceedsBudget) {
  const KernelTemplate t = group_window_template();
  const BackboneSpec spec = group_window_backbone();
  Budget budget;
  budget.max_params = 10;
  SolveOptions opts;
  opts.g = 4;
  const SolveResult r = solve(t, spec, budget, opts);
  ASSERT_TRUE(std::holds_alternative<Discarded>(r));
  ASSERT_TRUE(std::get<Discarded>(r).base.has_value());
  EXPECT_GT(std::get<Discarded>(r).base->params, 10);
}

TEST(MaximizeTest, RejectsForeignG) {
  SolveOptions opts;
  opts.g = 3;
  const SolveResult r = solve(group_window_template(), group_window_backbone(), {}, opts);
  EXPECT_TRUE(std::holds_alternative<Discarded>(r));
}

TEST(MaximizeTest, UnboundedStopsAtIterationCap) {
  SolveOptions opts;
  opts.g = 4;
  opts.maximize.max_iterations = 3;
  const SolveResult r = solve(group_window_template(), group_window_backbone(), {}, opts);
  ASSERT_TRUE(std::holds_alternative<Solution>(r));
  const auto& sol = std::get<Solution>(r);
  EXPECT_EQ(sol.x.at({0, x1}), 12 * 8);
  EXPECT_EQ(sol.status, "budget-unsaturated");
}

// Sound and locally maximal under random budgets.
TEST(MaximizeTest, SoundAndMaximal) {
  const KernelTemplate t = group_window_template();
  const BackboneSpec spec = group_window_backbone();
  const Cost original = original_network_cost(spec);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> frac(0.01, 0.6);
  const VarValues base = base_values(t, spec, 4);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Budget budget = budget_from_fractions(spec, frac(rng), frac(rng));
    SolveOptions opts;
    opts.g = 4;
    const SolveResult r = solve(t, spec, budget, opts);
    if (!std::holds_alternative<Solution>(r)) continue;
    ++solved;
    const auto& sol = std::get<Solution>(r);
    EXPECT_LE(sol.achieved.flops, *budget.max_flops);
    EXPECT_LE(sol.achieved.params, *budget.max_params);
    for (const auto& [key, v] : sol.x) {
      VarValues more = sol.x;
      more[key] = 2 * v;
      const Cost c = network_cost(spec, t, 4, more);
      EXPECT_TRUE(c.flops > *budget.max_flops || c.params > *budget.max_params);
    }
    // Every value is its base times a power of two.
    for (const auto& [key, v] : sol.x) {
      const std::int64_t q = v / base.at(key);
      EXPECT_EQ(v % base.at(key), 0);
      EXPECT_EQ(q & (q - 1), 0);
    }
  }
  EXPECT_GT(solved, 10);
  EXPECT_GT(original.flops, 0);
}

TEST(InstantiateTest, OneKernelPerReplaceableTarget) {
  const KernelTemplate t = group_window_template();
  BackboneSpec spec = group_window_backbone();
  spec.targets.push_back(make_target("stem", 3, 16, 8, 3));
  spec.targets.push_back(make_target("down", 8, 16, 8, 3));
  SolveOptions opts;
  opts.g = 4;
  opts.maximize.max_iterations = 0;
  const SolveResult r = solve(t, spec, {}, opts);
  ASSERT_TRUE(std::holds_alternative<Solution>(r));
  const auto kernels = instantiate(t, spec, std::get<Solution>(r));
  ASSERT_EQ(kernels.size(), 3u);
  EXPECT_EQ(kernels[2].target, "down");
  EXPECT_EQ(kernels[2].replicas, 2);
  EXPECT_EQ(kernels[2].mode, ReplicaMode::kConcat);
  EXPECT_EQ(kernels[0].assignment.dynvars.at(x1), 12);
  try {
    instantiate_target(t, spec, std::get<Solution>(r), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotReplaceable);
  }
}

}  // namespace
}  // namespace canvas
