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

// Hand-built kernels and backbones shared by the unit and acceptance tests.

#pragma once

#include "canvas/backbone.hpp"
#include "canvas/micro_dag.hpp"

namespace canvas::testing {

// [G,KH] pooled from the input is blended into an FC output [x1], so x1 must
// be a multiple of G*KH.
inline KernelTemplate group_window_template() {
  MicroDag g = MicroDag::input_only();
  g = g.grow(Group{Group::Mode::kByG, 0}, {0});                            // n1 [G,C/G|H,W]
  g = g.grow(Unfold{Axis::kH}, {1});                                       // n2 [G,C/G,KH|H,W]
  g = g.grow(Fold{1, Fold::Mode::kAvg}, {2});                              // n3 [G,KH|H,W]
  g = g.grow(FullyConnected{Dimension::of(VariableId{1}), false}, {0});    // n4 [x1|H,W]
  g = g.grow(Broadcast{BroadcastOp::kAdd}, {3, 4});                        // n5 [x1|H,W]
  g = g.grow(FullyConnected{parse_dimension("C"), false}, {5});            // n6 [C|H,W]
  return finalize(std::move(g));
}

inline Target make_target(const char* name, std::int64_t c_in, std::int64_t c_out,
                          std::int64_t hw, std::int64_t k) {
  Target t;
  t.name = name;
  t.c_in = c_in;
  t.c_out = c_out;
  t.h = hw;
  t.w = hw;
  t.kh = k;
  t.kw = k;
  t.original_params = c_in * c_out * k * k;
  t.original_flops = t.original_params * hw * hw;
  return t;
}

// Two targets with G*KH = 12 and 20 and a channel ratio of 5 under G = 4.
inline BackboneSpec group_window_backbone() {
  BackboneSpec spec;
  spec.targets = {make_target("narrow", 8, 8, 8, 3), make_target("wide", 40, 40, 8, 5)};
  return spec;
}

}  // namespace canvas::testing
