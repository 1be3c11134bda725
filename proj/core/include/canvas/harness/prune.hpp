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

// Accuracy-curve pruning. A candidate must reach lambda(x) times the best
// recorded accuracy at the same epoch, where lambda(x) = theta + (1-theta) x
// and x = epoch / total_epochs.

#pragma once

#include <vector>

namespace canvas::harness {

using AccuracyCurve = std::vector<double>;

struct PruneRule {
  double theta = 0.5;
  AccuracyCurve best_curve;  // empty until a candidate completes
};

double lambda(double theta, double x);

// Epochs are 1-based: epoch e reads curve[e - 1] and uses x = e / total.
double prune_threshold(const PruneRule& rule, int epoch, int total_epochs);

enum class PruneDecision { kContinue, kPrune };

// Continues while no best curve covers `epoch`.
PruneDecision prune_decision(const PruneRule& rule, const AccuracyCurve& candidate, int epoch,
                             int total_epochs);

// First epoch at which `candidate` would be pruned, or 0.
int first_prune_epoch(const PruneRule& rule, const AccuracyCurve& candidate, int total_epochs);

}  // namespace canvas::harness
