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

#include "canvas/harness/prune.hpp"

#include <string>

#include "canvas/error.hpp"

namespace canvas::harness {

double lambda(double theta, double x) { return theta + (1.0 - theta) * x; }

double prune_threshold(const PruneRule& rule, int epoch, int total_epochs) {
  if (total_epochs < 1 || epoch < 1 || epoch > total_epochs) {
    throw Error(ErrorCode::kInvalidArgument, "epoch " + std::to_string(epoch) + " outside 1.." +
                                                 std::to_string(total_epochs));
  }
  if (static_cast<std::size_t>(epoch) > rule.best_curve.size()) return 0.0;
  const double x = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return lambda(rule.theta, x) * rule.best_curve[static_cast<std::size_t>(epoch - 1)];
}

PruneDecision prune_decision(const PruneRule& rule, const AccuracyCurve& candidate, int epoch,
                             int total_epochs) {
  if (epoch < 1 || static_cast<std::size_t>(epoch) > candidate.size()) {
    throw Error(ErrorCode::kInvalidArgument, "epoch " + std::to_string(epoch) + " not in candidate curve");
  }
  if (static_cast<std::size_t>(epoch) > rule.best_curve.size()) return PruneDecision::kContinue;
  return candidate[static_cast<std::size_t>(epoch - 1)] < prune_threshold(rule, epoch, total_epochs)
             ? PruneDecision::kPrune
             : PruneDecision::kContinue;
}

int first_prune_epoch(const PruneRule& rule, const AccuracyCurve& candidate, int total_epochs) {
  for (int e = 1; e <= static_cast<int>(candidate.size()) && e <= total_epochs; ++e) {
    if (prune_decision(rule, candidate, e, total_epochs) == PruneDecision::kPrune) return e;
  }
  return 0;
}

}  // namespace canvas::harness
