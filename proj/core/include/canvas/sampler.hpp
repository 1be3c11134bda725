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

// Random micro-DAG sampler.
//
// Every step picks a primitive class with probability proportional to its
// weight among the classes that have at least one admissible candidate, then
// a candidate uniformly within the class. A candidate is admissible when the
// dag can still be merged into a single leaf within the remaining node
// budget, it passes the redundancy pre-screen and, on the last step, it
// produces [C|H,W].

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "canvas/micro_dag.hpp"
#include "canvas/primitive.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas {

using ClassWeights = std::array<double, kNumPrimitiveClasses>;

inline constexpr ClassWeights kUniformWeights = {1, 1, 1, 1, 1, 1, 1, 1};

struct SamplerConfig {
  std::size_t nodes = 12;  // N, including the input node
  std::uint64_t seed = 0;
  ClassWeights type_weights = kUniformWeights;
  std::size_t max_attempts = 100000;
  std::uint32_t prune_rules = kAllPruneRules;
  // Evaluate every class at every step so that unconstrained steps can be
  // counted. Slower; used for calibration.
  bool track_calibration = false;
};

// Parses "fc=2,bcast=0.5"; unnamed classes keep `base` values.
ClassWeights parse_weights(std::string_view text, ClassWeights base = kUniformWeights);
std::string render_weights(const ClassWeights& w);

// Throws Error(kInvalidArgument) when N < 2 or all weights are zero.
void validate(const SamplerConfig& cfg);

struct SamplerStats {
  std::uint64_t sampled = 0;  // attempts
  std::uint64_t pruned = 0;
  std::uint64_t deduped = 0;
  std::uint64_t discarded = 0;  // dead ends
  std::uint64_t accepted = 0;
  std::uint64_t steps = 0;
  // Steps at which every weighted class had a candidate, and the class
  // picked at those steps. Only filled with track_calibration.
  std::uint64_t unconstrained_steps = 0;
  std::array<std::uint64_t, kNumPrimitiveClasses> unconstrained_picks{};

  SamplerStats& operator+=(const SamplerStats& o);
  bool consistent() const { return sampled == pruned + deduped + discarded + accepted; }
};

// Shared set of accepted iso_hash digests.
class DedupStore {
 public:
  // True when `h` was not present.
  bool insert(std::uint64_t h);
  bool contains(std::uint64_t h) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_set<std::uint64_t> seen_;
};

struct Candidate {
  PrimitiveKind kind;
  std::vector<std::size_t> inputs;  // (lhs, rhs) for blends
  std::shared_ptr<const BroadcastMatch> match;

  // Substitutions that make a blend legal; empty when none is needed.
  std::vector<Dimension> substitutions;
};

// Full distribution over admissible candidates for the next step of `g`,
// computed eagerly (every blend substitution is checked). Intended for tests
// and diagnostics; the sampler draws from the same distribution lazily.
// `remaining` is N minus the current node count.
std::vector<std::pair<Candidate, double>> candidate_probabilities(const MicroDag& g,
                                                                  const SamplerConfig& cfg,
                                                                  std::size_t remaining);

class Sampler {
 public:
  // `store` may be null for an unshared private store.
  Sampler(SamplerConfig cfg, std::shared_ptr<DedupStore> store = nullptr,
          std::uint64_t worker_id = 0);

  // Throws Error(kExhausted) after max_attempts attempts.
  KernelTemplate sample();

  // One attempt; nullopt on dead end, prune or duplicate.
  std::optional<KernelTemplate> attempt();

  const SamplerStats& stats() const { return stats_; }
  const SamplerConfig& config() const { return cfg_; }

 private:
  struct StepLists;

  std::shared_ptr<const BroadcastMatch> cached_match(const Shape& lhs, const Shape& rhs);

  SamplerConfig cfg_;
  std::shared_ptr<DedupStore> store_;
  std::mt19937_64 rng_;
  SamplerStats stats_;

  struct PairHash {
    std::size_t operator()(const std::pair<Shape, Shape>& p) const noexcept {
      return p.first.hash() * 31 + p.second.hash();
    }
  };
  std::unordered_map<std::pair<Shape, Shape>, std::shared_ptr<const BroadcastMatch>, PairHash>
      match_cache_;
};

// Runs `jobs` workers (seeds cfg.seed + worker id) sharing one dedup store
// until `count` kernels are accepted. With jobs == 1 the output is
// deterministic. Throws Error(kExhausted) if a worker runs out of attempts.
struct SampleBatch {
  std::vector<KernelTemplate> kernels;
  SamplerStats stats;
};
SampleBatch sample_batch(const SamplerConfig& cfg, std::size_t count, std::size_t jobs = 1,
                         std::shared_ptr<DedupStore> store = nullptr);

}  // namespace canvas
