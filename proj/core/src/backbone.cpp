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

#include "canvas/backbone.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "canvas/cost_model.hpp"
#include "canvas/error.hpp"
#include "json.hpp"

namespace canvas {

namespace {

using Json = nlohmann::json;

std::int64_t positive(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw Error(ErrorCode::kParse, std::string("target field '") + key + "' must be an integer");
  }
  auto v = j[key].get<std::int64_t>();
  if (v < 1) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be >= 1");
  return v;
}

std::int64_t optional_count(const Json& j, const char* key) {
  if (!j.contains(key)) return 0;
  if (!j[key].is_number_integer() || j[key].get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a nonnegative integer");
  }
  return j[key].get<std::int64_t>();
}

}  // namespace

bool Target::replaceable() const {
  return c_in > 0 && c_out > 0 && (c_in % c_out == 0 || c_out % c_in == 0);
}

std::int64_t Target::channels() const { return std::min(c_in, c_out); }

std::int64_t Target::replicas() const { return std::max(c_in, c_out) / std::min(c_in, c_out); }

BackboneSpec parse_backbone(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("backbone json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("targets") || !j["targets"].is_array()) {
    throw Error(ErrorCode::kParse, "backbone needs a 'targets' array");
  }
  BackboneSpec spec;
  for (const auto& tj : j["targets"]) {
    Target t;
    t.name = tj.value("name", "target" + std::to_string(spec.targets.size()));
    t.c_in = positive(tj, "C_in");
    t.c_out = positive(tj, "C_out");
    t.h = positive(tj, "H");
    t.w = positive(tj, "W");
    t.kh = positive(tj, "K_H");
    t.kw = positive(tj, "K_W");
    const Cost dense = conv_baseline(t);
    t.original_flops = tj.contains("original_flops") ? optional_count(tj, "original_flops") : dense.flops;
    t.original_params =
        tj.contains("original_params") ? optional_count(tj, "original_params") : dense.params;
    spec.targets.push_back(std::move(t));
  }
  spec.non_replaced_flops = optional_count(j, "non_replaced_flops");
  spec.non_replaced_params = optional_count(j, "non_replaced_params");
  return spec;
}

BackboneSpec load_backbone(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_backbone(ss.str());
}

std::string to_json(const BackboneSpec& spec) {
  Json j;
  j["targets"] = Json::array();
  for (const auto& t : spec.targets) {
    j["targets"].push_back({{"name", t.name},
                            {"C_in", t.c_in},
                            {"C_out", t.c_out},
                            {"H", t.h},
                            {"W", t.w},
                            {"K_H", t.kh},
                            {"K_W", t.kw},
                            {"original_flops", t.original_flops},
                            {"original_params", t.original_params}});
  }
  j["non_replaced_flops"] = spec.non_replaced_flops;
  j["non_replaced_params"] = spec.non_replaced_params;
  return j.dump(2);
}

Assignment target_constants(const Target& t, std::int64_t g) {
  Assignment a;
  a.constants[Constant::kC] = t.channels();
  a.constants[Constant::kH] = t.h;
  a.constants[Constant::kW] = t.w;
  a.constants[Constant::kKH] = t.kh;
  a.constants[Constant::kKW] = t.kw;
  if (g > 0) a.constants[Constant::kG] = g;
  return a;
}

Budget budget_from_fractions(const BackboneSpec& spec, std::optional<double> flops_frac,
                             std::optional<double> params_frac) {
  const Cost total = original_network_cost(spec);
  Budget b;
  auto scaled = [](std::int64_t v, double f) {
    if (!(f > 0)) throw Error(ErrorCode::kInvalidArgument, "budget fraction must be positive");
    return static_cast<std::int64_t>(std::floor(static_cast<long double>(v) * f));
  };
  if (flops_frac) b.max_flops = scaled(total.flops, *flops_frac);
  if (params_frac) b.max_params = scaled(total.params, *params_frac);
  return b;
}

}  // namespace canvas
