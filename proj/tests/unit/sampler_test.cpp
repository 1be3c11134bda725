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

#include "canvas/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "canvas/error.hpp"

namespace canvas {
namespace {

TEST(WeightsTest, ParseAndRender) {
  const ClassWeights w = parse_weights("fc=2,bcast=0.5");
  EXPECT_DOUBLE_EQ(w[static_cast<std::size_t>(PrimitiveClass::kFullyConnected)], 2.0);
  EXPECT_DOUBLE_EQ(w[static_cast<std::size_t>(PrimitiveClass::kBroadcast)], 0.5);
  EXPECT_DOUBLE_EQ(w[static_cast<std::size_t>(PrimitiveClass::kShift)], 1.0);
  EXPECT_EQ(parse_weights(render_weights(w)), w);
  EXPECT_THROW(parse_weights("conv=1"), Error);
  EXPECT_THROW(parse_weights("fc=-1"), Error);
}

TEST(SamplerConfigTest, Validate) {
  SamplerConfig cfg;
  cfg.nodes = 1;
  EXPECT_THROW(validate(cfg), Error);
  cfg.nodes = 5;
  cfg.type_weights = {};
  EXPECT_THROW(validate(cfg), Error);
  EXPECT_THROW(Sampler{cfg}, Error);
}

TEST(SamplerTest, KernelsAreFinalizedAndSatisfyTheorem1) {
  for (std::size_t n : {3, 6, 10, 15}) {
    SamplerConfig cfg;
    cfg.nodes = n;
    cfg.seed = 100 + n;
    Sampler s(cfg);
    for (int i = 0; i < 20; ++i) {
      const KernelTemplate t = s.sample();
      EXPECT_EQ(t.dag.num_nodes(), n);
      EXPECT_EQ(t.dag.width(), 1u);
      EXPECT_EQ(t.dag.shape(t.output_node), Shape::input());
      for (const auto& shape : t.dag.nodes()) {
        EXPECT_TRUE(validate_theorem1(shape).empty()) << shape.render();
        EXPECT_TRUE(non_integral_dims(shape).empty()) << shape.render();
      }
      for (const auto& e : t.dag.edges()) {
        EXPECT_EQ(output_shape(e.inst.kind, e.inst.inputs), e.inst.output);
      }
      EXPECT_FALSE(prune_check(t.dag).has_value());
    }
    EXPECT_TRUE(s.stats().consistent());
    EXPECT_EQ(s.stats().accepted, 20u);
  }
}

TEST(SamplerTest, DeterministicForASeed) {
  SamplerConfig cfg;
  cfg.nodes = 8;
  cfg.seed = 42;
  const auto a = sample_batch(cfg, 10);
  const auto b = sample_batch(cfg, 10);
  ASSERT_EQ(a.kernels.size(), 10u);
  EXPECT_EQ(a.kernels, b.kernels);
  std::set<std::uint64_t> hashes;
  for (const auto& k : a.kernels) hashes.insert(iso_hash(k.dag));
  EXPECT_EQ(hashes.size(), 10u);
}

TEST(SamplerTest, ParallelBatchSharesDedup) {
  SamplerConfig cfg;
  cfg.nodes = 6;
  cfg.seed = 7;
  auto store = std::make_shared<DedupStore>();
  const auto batch = sample_batch(cfg, 40, 3, store);
  EXPECT_EQ(batch.kernels.size(), 40u);
  std::set<std::uint64_t> hashes;
  for (const auto& k : batch.kernels) hashes.insert(iso_hash(k.dag));
  EXPECT_EQ(hashes.size(), 40u);
  EXPECT_GE(store->size(), 40u);
  EXPECT_TRUE(batch.stats.consistent());
}

TEST(SamplerTest, ExhaustsTinySpace) {
  // Two nodes admit only a handful of distinct single-edge kernels.
  SamplerConfig cfg;
  cfg.nodes = 2;
  cfg.max_attempts = 2000;
  Sampler s(cfg);
  std::set<std::uint64_t> seen;
  try {
    for (;;) seen.insert(iso_hash(s.sample().dag));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExhausted);
  }
  EXPECT_GT(seen.size(), 3u);
  EXPECT_LT(seen.size(), 30u);
  EXPECT_TRUE(s.stats().consistent());
  EXPECT_GT(s.stats().deduped, 0u);
}

TEST(SamplerTest, ZeroWeightClassIsNeverUsed) {
  SamplerConfig cfg;
  cfg.nodes = 8;
  cfg.type_weights = parse_weights("softmax=0,ew=0");
  const auto batch = sample_batch(cfg, 30);
  for (const auto& k : batch.kernels) {
    for (const auto& e : k.dag.edges()) {
      const auto c = primitive_class(e.inst.kind);
      EXPECT_NE(c, PrimitiveClass::kSoftmax);
      EXPECT_NE(c, PrimitiveClass::kElementWise);
    }
  }
}

TEST(CandidateProbabilitiesTest, NormalizedAndWeighted) {
  SamplerConfig cfg;
  cfg.nodes = 10;
  cfg.type_weights = parse_weights("fc=3");
  MicroDag g = MicroDag::input_only();
  g = g.grow(Unfold{Axis::kH}, {0});
  const auto dist = candidate_probabilities(g, cfg, cfg.nodes - g.num_nodes());
  ASSERT_FALSE(dist.empty());
  double total = 0;
  std::array<double, kNumPrimitiveClasses> per_class{};
  for (const auto& [c, p] : dist) {
    EXPECT_GT(p, 0);
    total += p;
    per_class[static_cast<std::size_t>(primitive_class(c.kind))] += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Every class is available here; fc carries 3 of 10 weight units.
  EXPECT_NEAR(per_class[static_cast<std::size_t>(PrimitiveClass::kFullyConnected)], 0.3, 1e-12);
  EXPECT_NEAR(per_class[static_cast<std::size_t>(PrimitiveClass::kShift)], 0.1, 1e-12);
}

TEST(CandidateProbabilitiesTest, LastStepMustCloseTheKernel) {
  SamplerConfig cfg;
  cfg.nodes = 3;
  MicroDag g = MicroDag::input_only().grow(Unfold{Axis::kH}, {0});
  for (const auto& [c, p] : candidate_probabilities(g, cfg, 1)) {
    const MicroDag next = g.grow(c.kind, c.inputs);
    EXPECT_EQ(next.width(), 1u) << mnemonic(c.kind);
    EXPECT_EQ(next.shape(next.num_nodes() - 1), Shape::input()) << mnemonic(c.kind);
  }
}

TEST(SamplerTest, CalibrationTracksWeights) {
  SamplerConfig cfg;
  cfg.nodes = 12;
  cfg.seed = 5;
  cfg.track_calibration = true;
  cfg.type_weights = parse_weights("fc=2,bcast=0.5");
  const auto batch = sample_batch(cfg, 300);
  const auto& st = batch.stats;
  ASSERT_GT(st.unconstrained_steps, 1000u);
  const double sum = std::accumulate(cfg.type_weights.begin(), cfg.type_weights.end(), 0.0);
  for (std::size_t i = 0; i < kNumPrimitiveClasses; ++i) {
    const double freq =
        static_cast<double>(st.unconstrained_picks[i]) / static_cast<double>(st.unconstrained_steps);
    const double want = cfg.type_weights[i] / sum;
    const double sigma = std::sqrt(want * (1 - want) / static_cast<double>(st.unconstrained_steps));
    EXPECT_NEAR(freq, want, 5 * sigma) << class_name(kAllPrimitiveClasses[i]);
  }
}

}  // namespace
}  // namespace canvas
