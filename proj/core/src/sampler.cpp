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

#include <algorithm>
#include <atomic>
#include <charconv>
#include <thread>

#include "canvas/error.hpp"

namespace canvas {

namespace {

constexpr std::size_t kBlendClass = static_cast<std::size_t>(PrimitiveClass::kBroadcast);
constexpr std::size_t kMatchCacheLimit = 1 << 16;

// Width after appending a unary edge on `node` or a blend on (l, r).
std::size_t width_after_unary(const MicroDag& g, std::size_t node) {
  return g.width() + (g.is_leaf(node) ? 0 : 1);
}

std::size_t width_after_blend(const MicroDag& g, std::size_t l, std::size_t r) {
  return g.width() + 1 - (g.is_leaf(l) ? 1 : 0) - (g.is_leaf(r) ? 1 : 0);
}

// Unary candidates of every class for the next step.
void collect_unary(const MicroDag& g, std::size_t remaining, VariableId fresh,
                   std::uint32_t rules, std::array<std::vector<Candidate>, kNumPrimitiveClasses>& out) {
  const bool last = remaining == 1;
  const Shape target = Shape::input();
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    if (width_after_unary(g, v) > remaining) continue;
    const std::size_t in[1] = {v};
    for (auto& kind : applicable_unary(g.shape(v), fresh)) {
      if (last) {
        if (auto* fc = std::get_if<FullyConnected>(&kind)) fc->output = Dimension::of(Constant::kC);
        try {
          const Shape s[1] = {g.shape(v)};
          if (!(output_shape(kind, s) == target)) continue;
        } catch (const Error&) {
          continue;
        }
      }
      if (prune_check_edge(g, kind, in, rules)) continue;
      const auto c = static_cast<std::size_t>(primitive_class(kind));
      out[c].push_back(Candidate{std::move(kind), {v}, nullptr, {}});
    }
  }
}

template <class MatchFn>
void collect_blends(const MicroDag& g, std::size_t remaining, std::uint32_t rules,
                    MatchFn&& match, std::vector<Candidate>& out) {
  const bool last = remaining == 1;
  const Shape target = Shape::input();
  const std::size_t n = g.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (auto [l, r] : {std::pair{i, j}, std::pair{j, i}}) {
        if (width_after_blend(g, l, r) > remaining) continue;
        if (last && !(g.shape(r) == target)) continue;
        auto m = match(g.shape(l), g.shape(r));
        if (!m) continue;
        const std::size_t in[2] = {l, r};
        for (auto op : kAllBroadcastOps) {
          PrimitiveKind kind = Broadcast{op};
          if (prune_check_edge(g, kind, in, rules)) continue;
          out.push_back(Candidate{std::move(kind), {l, r}, m, {}});
        }
      }
    }
  }
}

// Applies a blend candidate with substitution `subst` (nullptr when none is
// needed). Returns nullopt when the substitution turns out illegal.
std::optional<MicroDag> apply_blend(const MicroDag& g, const Candidate& c, const Dimension* subst) {
  try {
    MicroDag base = subst ? apply_substitution(g, *c.match->lhs_var, *subst) : g;
    std::vector<Shape> shapes = {base.shape(c.inputs[0]), base.shape(c.inputs[1])};
    auto inst = make_instance(c.kind, std::move(shapes));
    return std::move(base).grow(std::move(inst), c.inputs);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIllegalSubstitution || e.code() == ErrorCode::kNotApplicable) {
      return std::nullopt;
    }
    throw;
  }
}

std::shared_ptr<const BroadcastMatch> uncached_match(const Shape& l, const Shape& r) {
  auto m = match_broadcast(l, r);
  return m ? std::make_shared<const BroadcastMatch>(std::move(*m)) : nullptr;
}

}  // namespace

ClassWeights parse_weights(std::string_view text, ClassWeights base) {
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "weight item needs '=': '" + std::string(item) + "'");
    }
    auto cls = parse_class(item.substr(0, eq));
    if (!cls) throw Error(ErrorCode::kParse, "unknown primitive class '" + std::string(item) + "'");
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double w = 0;
    try {
      w = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !(w >= 0)) {
      throw Error(ErrorCode::kParse, "bad weight '" + value + "'");
    }
    base[static_cast<std::size_t>(*cls)] = w;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return base;
}

std::string render_weights(const ClassWeights& w) {
  std::string s;
  for (auto c : kAllPrimitiveClasses) {
    if (!s.empty()) s += ',';
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w[static_cast<std::size_t>(c)]);
    s += std::string(class_name(c)) + "=" + std::string(buf, ptr);
  }
  return s;
}

void validate(const SamplerConfig& cfg) {
  if (cfg.nodes < 2) throw Error(ErrorCode::kInvalidArgument, "node budget must be >= 2");
  bool any = false;
  for (double w : cfg.type_weights) {
    if (!(w >= 0)) throw Error(ErrorCode::kInvalidArgument, "weights must be nonnegative");
    any = any || w > 0;
  }
  if (!any) throw Error(ErrorCode::kInvalidArgument, "all primitive weights are zero");
}

SamplerStats& SamplerStats::operator+=(const SamplerStats& o) {
  sampled += o.sampled;
  pruned += o.pruned;
  deduped += o.deduped;
  discarded += o.discarded;
  accepted += o.accepted;
  steps += o.steps;
  unconstrained_steps += o.unconstrained_steps;
  for (std::size_t i = 0; i < kNumPrimitiveClasses; ++i) unconstrained_picks[i] += o.unconstrained_picks[i];
  return *this;
}

bool DedupStore::insert(std::uint64_t h) {
  std::lock_guard lock(mu_);
  return seen_.insert(h).second;
}

bool DedupStore::contains(std::uint64_t h) const {
  std::lock_guard lock(mu_);
  return seen_.count(h) != 0;
}

std::size_t DedupStore::size() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<std::pair<Candidate, double>> candidate_probabilities(const MicroDag& g,
                                                                  const SamplerConfig& cfg,
                                                                  std::size_t remaining) {
  std::vector<std::pair<Candidate, double>> out;
  if (remaining == 0 || g.width() > remaining + 1) return out;  // dead end
  std::array<std::vector<Candidate>, kNumPrimitiveClasses> lists;
  collect_unary(g, remaining, VariableId{g.max_variable_id() + 1}, cfg.prune_rules, lists);
  std::vector<Candidate> blends;
  collect_blends(g, remaining, cfg.prune_rules, uncached_match, blends);
  for (auto& c : blends) {
    if (c.match->legal_without_substitution) {
      if (apply_blend(g, c, nullptr)) lists[kBlendClass].push_back(std::move(c));
      continue;
    }
    for (const auto& f : c.match->substitutions) {
      if (apply_blend(g, c, &f)) c.substitutions.push_back(f);
    }
    if (!c.substitutions.empty()) lists[kBlendClass].push_back(std::move(c));
  }

  double total = 0;
  for (std::size_t k = 0; k < kNumPrimitiveClasses; ++k) {
    if (!lists[k].empty()) total += cfg.type_weights[k];
  }
  if (total <= 0) return out;
  for (std::size_t k = 0; k < kNumPrimitiveClasses; ++k) {
    if (lists[k].empty() || cfg.type_weights[k] <= 0) continue;
    const double p = cfg.type_weights[k] / total / static_cast<double>(lists[k].size());
    for (auto& c : lists[k]) out.emplace_back(std::move(c), p);
  }
  return out;
}

Sampler::Sampler(SamplerConfig cfg, std::shared_ptr<DedupStore> store, std::uint64_t worker_id)
    : cfg_(std::move(cfg)),
      store_(store ? std::move(store) : std::make_shared<DedupStore>()),
      rng_(cfg_.seed + worker_id) {
  validate(cfg_);
}

std::shared_ptr<const BroadcastMatch> Sampler::cached_match(const Shape& lhs, const Shape& rhs) {
  auto key = std::make_pair(lhs, rhs);
  if (auto it = match_cache_.find(key); it != match_cache_.end()) return it->second;
  if (match_cache_.size() >= kMatchCacheLimit) match_cache_.clear();
  auto m = uncached_match(lhs, rhs);
  match_cache_.emplace(std::move(key), m);
  return m;
}

KernelTemplate Sampler::sample() {
  for (std::size_t i = 0; i < cfg_.max_attempts; ++i) {
    if (auto t = attempt()) return std::move(*t);
  }
  throw Error(ErrorCode::kExhausted,
              "no new legal kernel after " + std::to_string(cfg_.max_attempts) + " attempts");
}

std::optional<KernelTemplate> Sampler::attempt() {
  ++stats_.sampled;
  MicroDag g = MicroDag::input_only();
  std::vector<std::string> notes;
  std::uint32_t next_var = 1;
  auto match_fn = [this](const Shape& l, const Shape& r) { return cached_match(l, r); };

  while (g.num_nodes() < cfg_.nodes) {
    ++stats_.steps;
    const std::size_t remaining = cfg_.nodes - g.num_nodes();
    if (g.width() > remaining + 1) {
      ++stats_.discarded;
      return std::nullopt;
    }
    const VariableId fresh{next_var};

    std::array<std::vector<Candidate>, kNumPrimitiveClasses> lists;
    collect_unary(g, remaining, fresh, cfg_.prune_rules, lists);
    bool blends_built = false;
    auto build_blends = [&] {
      if (!blends_built) collect_blends(g, remaining, cfg_.prune_rules, match_fn, lists[kBlendClass]);
      blends_built = true;
    };

    // Tries blend candidate `c`, removing substitutions that fail. Returns the
    // grown dag or nullopt when the candidate is unusable.
    std::string subst_note;
    auto try_blend = [&](const Candidate& c) -> std::optional<MicroDag> {
      subst_note.clear();
      if (c.match->legal_without_substitution) return apply_blend(g, c, nullptr);
      std::vector<std::size_t> order(c.match->substitutions.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      while (!order.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, order.size() - 1);
        const std::size_t at = pick(rng_);
        const Dimension& f = c.match->substitutions[order[at]];
        if (auto grown = apply_blend(g, c, &f)) {
          subst_note = "subst: " + variable_name(*c.match->lhs_var) + " := " + f.render();
          return grown;
        }
        order.erase(order.begin() + static_cast<std::ptrdiff_t>(at));
      }
      return std::nullopt;
    };

    std::array<bool, kNumPrimitiveClasses> open{};
    for (std::size_t k = 0; k < kNumPrimitiveClasses; ++k) open[k] = cfg_.type_weights[k] > 0;

    std::optional<std::size_t> tracked_pick;
    if (cfg_.track_calibration) {
      bool all = true;
      for (std::size_t k = 0; k < kNumPrimitiveClasses && all; ++k) {
        if (!open[k]) continue;
        if (k == kBlendClass) {
          build_blends();
          // Probe without consuming randomness: any usable blend will do.
          bool usable = false;
          for (const auto& c : lists[k]) {
            if (c.match->legal_without_substitution) {
              usable = apply_blend(g, c, nullptr).has_value();
            } else {
              for (const auto& f : c.match->substitutions) {
                if (apply_blend(g, c, &f)) {
                  usable = true;
                  break;
                }
              }
            }
            if (usable) break;
          }
          all = usable;
        } else {
          all = !lists[k].empty();
        }
      }
      if (all) tracked_pick.emplace();
    }

    std::optional<MicroDag> grown;
    std::string match_note;
    bool first_draw = true;
    while (!grown) {
      double total = 0;
      for (std::size_t k = 0; k < kNumPrimitiveClasses; ++k) {
        if (open[k]) total += cfg_.type_weights[k];
      }
      if (total <= 0) {
        ++stats_.discarded;
        return std::nullopt;
      }
      std::uniform_real_distribution<double> u(0.0, total);
      double x = u(rng_);
      std::size_t cls = kNumPrimitiveClasses;
      for (std::size_t k = 0; k < kNumPrimitiveClasses; ++k) {
        if (!open[k]) continue;
        cls = k;
        if (x < cfg_.type_weights[k]) break;
        x -= cfg_.type_weights[k];
      }
      if (first_draw && tracked_pick) *tracked_pick = cls;
      first_draw = false;

      if (cls == kBlendClass) build_blends();
      auto& list = lists[cls];
      while (!list.empty() && !grown) {
        std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
        const std::size_t at = pick(rng_);
        const Candidate& c = list[at];
        if (cls == kBlendClass) {
          grown = try_blend(c);
          if (grown) {
            match_note = "match: n" + std::to_string(c.inputs[0]) + " -> n" +
                         std::to_string(c.inputs[1]) + " " + c.match->render();
          } else {
            list.erase(list.begin() + static_cast<std::ptrdiff_t>(at));
          }
        } else {
          if (std::holds_alternative<FullyConnected>(c.kind) && remaining > 1) ++next_var;
          grown = g.grow(c.kind, c.inputs);
        }
      }
      if (!grown) open[cls] = false;
    }

    if (tracked_pick) {
      ++stats_.unconstrained_steps;
      ++stats_.unconstrained_picks[*tracked_pick];
    }
    if (!match_note.empty()) notes.push_back(std::move(match_note));
    if (!subst_note.empty()) notes.push_back(std::move(subst_note));
    g = std::move(*grown);
  }

  if (g.width() != 1) {
    ++stats_.discarded;
    return std::nullopt;
  }
  KernelTemplate t = finalize(std::move(g), std::move(notes));
  if (prune_check(t.dag, cfg_.prune_rules)) {
    ++stats_.pruned;
    return std::nullopt;
  }
  if (!store_->insert(iso_hash(t.dag))) {
    ++stats_.deduped;
    return std::nullopt;
  }
  ++stats_.accepted;
  return t;
}

SampleBatch sample_batch(const SamplerConfig& cfg, std::size_t count, std::size_t jobs,
                         std::shared_ptr<DedupStore> store) {
  validate(cfg);
  if (!store) store = std::make_shared<DedupStore>();
  SampleBatch batch;
  if (jobs <= 1) {
    Sampler s(cfg, store, 0);
    for (std::size_t i = 0; i < count; ++i) batch.kernels.push_back(s.sample());
    batch.stats = s.stats();
    return batch;
  }

  std::atomic<std::size_t> claimed{0};
  std::vector<std::vector<KernelTemplate>> per_worker(jobs);
  std::vector<SamplerStats> stats(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < jobs; ++w) {
    threads.emplace_back([&, w] {
      try {
        Sampler s(cfg, store, w);
        std::size_t misses = 0;
        while (claimed.load() < count) {
          auto t = s.attempt();
          if (!t) {
            if (++misses >= cfg.max_attempts) {
              throw Error(ErrorCode::kExhausted, "worker " + std::to_string(w) + " exhausted");
            }
            continue;
          }
          misses = 0;
          if (claimed.fetch_add(1) < count) per_worker[w].push_back(std::move(*t));
        }
        stats[w] = s.stats();
      } catch (...) {
        errors[w] = std::current_exception();
        claimed.store(count);
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t w = 0; w < jobs; ++w) {
    for (auto& t : per_worker[w]) batch.kernels.push_back(std::move(t));
    batch.stats += stats[w];
  }
  return batch;
}

}  // namespace canvas
