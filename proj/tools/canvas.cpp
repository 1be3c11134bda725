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

// canvas: sample, solve, interpret, stats, emit and search kernels.
//
// Exit codes: 0 success, 2 validation failure, 3 exhausted or discarded,
// 64 usage error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "canvas/backbone.hpp"
#include "canvas/constraint_solver.hpp"
#include "canvas/cost_model.hpp"
#include "canvas/error.hpp"
#include "canvas/harness/dispatcher.hpp"
#include "canvas/harness/emitter.hpp"
#include "canvas/harness/simulated_worker.hpp"
#include "canvas/interpreter.hpp"
#include "canvas/kernel_ir.hpp"
#include "canvas/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kExhaustedOrDiscarded = 3;
constexpr int kUsage = 64;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw canvas::Error(canvas::ErrorCode::kIo, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw canvas::Error(canvas::ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

std::uint64_t draw_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json counts_json(const canvas::SamplerStats& s) {
  return {{"sampled", s.sampled},   {"pruned", s.pruned},     {"deduped", s.deduped},
          {"discarded", s.discarded}, {"accepted", s.accepted}};
}

json sampler_config_json(const canvas::SamplerConfig& cfg) {
  return {{"nodes", cfg.nodes},
          {"weights", canvas::render_weights(cfg.type_weights)},
          {"max_attempts", cfg.max_attempts},
          {"prune_rules", cfg.prune_rules}};
}

struct SamplerFlags {
  std::size_t nodes = 12;
  std::optional<std::uint64_t> seed;
  std::string weights;
  std::size_t max_attempts = 100000;
  bool no_prune = false;

  void add(CLI::App* app) {
    app->add_option("--nodes", nodes, "Nodes per kernel, including the input")->check(CLI::Range(2, 64));
    app->add_option("--seed", seed, "Random seed (drawn and echoed when absent)");
    app->add_option("--weights", weights, "Per-class weights, e.g. fc=2,bcast=0.5");
    app->add_option("--max-attempts", max_attempts, "Attempts before giving up");
    app->add_flag("--no-prune", no_prune, "Disable redundancy pruning");
  }

  canvas::SamplerConfig config() {
    if (!seed) seed = draw_seed();
    canvas::SamplerConfig cfg;
    cfg.nodes = nodes;
    cfg.seed = *seed;
    cfg.type_weights = canvas::parse_weights(weights);
    cfg.max_attempts = max_attempts;
    cfg.prune_rules = no_prune ? 0u : canvas::kAllPruneRules;
    canvas::validate(cfg);
    return cfg;
  }
};

// ---------------------------------------------------------------- sample

struct SampleCmd {
  SamplerFlags sampler;
  std::size_t count = 1;
  std::size_t jobs = 1;
  std::string out = ".";

  int run() {
    auto cfg = sampler.config();
    fs::create_directories(out);
    json report = {{"command", "sample"}, {"seed", cfg.seed}, {"config", sampler_config_json(cfg)}};
    report["config"]["count"] = count;
    report["config"]["jobs"] = jobs;
    try {
      auto batch = canvas::sample_batch(cfg, count, jobs);
      std::ostringstream manifest;
      json files = json::array();
      for (std::size_t i = 0; i < batch.kernels.size(); ++i) {
        const auto h = canvas::iso_hash(batch.kernels[i].dag);
        const std::string name = "kernel_" + std::to_string(i) + "_" + hex(h) + ".cir";
        write_file(fs::path(out) / name, canvas::emit_ir(batch.kernels[i]));
        manifest << hex(h) << ' ' << name << '\n';
        files.push_back(name);
      }
      write_file(fs::path(out) / "manifest", manifest.str());
      report["counts"] = counts_json(batch.stats);
      report["kernels"] = files;
      write_file(fs::path(out) / "report.json", report.dump(2) + "\n");
      std::cout << "seed " << cfg.seed << ": wrote " << batch.kernels.size() << " kernel(s) to " << out
                << "\n";
      return kOk;
    } catch (const canvas::Error& e) {
      if (e.code() != canvas::ErrorCode::kExhausted) throw;
      report["status"] = "exhausted";
      report["error"] = e.what();
      write_file(fs::path(out) / "report.json", report.dump(2) + "\n");
      std::cerr << e.what() << "\n";
      return kExhaustedOrDiscarded;
    }
  }
};

// ---------------------------------------------------------------- solve

struct SolveCmd {
  std::string backbone;
  std::string kernel;
  std::optional<double> flops_frac;
  std::optional<double> params_frac;
  std::optional<std::int64_t> g;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string report_path;

  int run() {
    if (!seed) seed = draw_seed();
    const auto spec = canvas::load_backbone(backbone);
    const auto tmpl = canvas::parse_ir(read_file(kernel));
    const auto budget = canvas::budget_from_fractions(spec, flops_frac, params_frac);
    canvas::SolveOptions opts;
    opts.g = g;
    opts.seed = *seed;
    const auto result = canvas::solve(tmpl, spec, budget, opts);
    json report = {{"command", "solve"}, {"seed", *seed}, {"kernel", kernel}, {"backbone", backbone}};
    if (budget.max_flops) report["budget"]["max_flops"] = *budget.max_flops;
    if (budget.max_params) report["budget"]["max_params"] = *budget.max_params;
    int code = kOk;
    if (const auto* d = std::get_if<canvas::Discarded>(&result)) {
      report["status"] = "discarded";
      report["reason"] = d->reason;
      if (d->base) report["base"] = {{"flops", d->base->flops}, {"params", d->base->params}};
      std::cout << "discarded: " << d->reason << "\n";
      code = kExhaustedOrDiscarded;
    } else {
      const auto& sol = std::get<canvas::Solution>(result);
      const std::string text = canvas::emit_ir(tmpl) + canvas::emit_solution(sol, spec);
      if (out.empty()) {
        std::cout << text;
      } else {
        write_file(out, text);
      }
      const auto net = canvas::network_report(spec, tmpl, sol.g, sol.x);
      report["status"] = sol.status;
      report["G"] = sol.g;
      report["flops"] = sol.achieved.flops;
      report["params"] = sol.achieved.params;
      report["flops_ratio"] = net.flops_ratio;
      report["params_ratio"] = net.params_ratio;
      report["ideal_speedup"] = net.ideal_speedup;
      report["targets"] = json::array();
      for (const auto& row : net.targets) {
        report["targets"].push_back({{"name", row.name},
                                     {"replaced", row.replaced},
                                     {"original_flops", row.original.flops},
                                     {"original_params", row.original.params},
                                     {"kernel_flops", row.kernel.flops},
                                     {"kernel_params", row.kernel.params}});
      }
      std::cerr << "flops " << sol.achieved.flops << " (" << net.flops_ratio << "x), params "
                << sol.achieved.params << " (" << net.params_ratio << "x)\n";
    }
    if (!report_path.empty()) write_file(report_path, report.dump(2) + "\n");
    return code;
  }
};

// ---------------------------------------------------------------- concrete kernels

canvas::ConcreteKernel load_concrete(const std::string& kernel, const std::string& assign,
                                     const std::string& backbone, const std::string& target) {
  auto doc = canvas::parse_ir_document(read_file(kernel));
  if (!assign.empty()) {
    canvas::ConcreteKernel k;
    k.tmpl = doc.tmpl;
    k.assignment = canvas::parse_assignment(assign);
    k.target = "cli";
    return k;
  }
  if (doc.concrete) return *doc.concrete;
  if (doc.solution && !backbone.empty()) {
    const auto spec = canvas::load_backbone(backbone);
    for (std::size_t i = 0; i < spec.targets.size(); ++i) {
      const auto& t = spec.targets[i];
      if (!t.replaceable()) continue;
      if (target.empty() || t.name == target) {
        return canvas::instantiate_target(doc.tmpl, spec, *doc.solution, i);
      }
    }
    throw canvas::Error(canvas::ErrorCode::kInvalidArgument, "no replaceable target '" + target + "'");
  }
  throw canvas::Error(canvas::ErrorCode::kInvalidArgument,
                      "kernel is a template: pass --assign, or --backbone with a solution record");
}

// ---------------------------------------------------------------- interpret

struct InterpretCmd {
  std::string kernel;
  std::string assign;
  std::string backbone;
  std::string target;
  std::string input;
  std::string weights;
  std::uint64_t seed = 1;

  int run() {
    const auto k = load_concrete(kernel, assign, backbone, target);
    const auto& a = k.assignment;
    const std::int64_t c = a.constants.at(canvas::Constant::kC);
    const std::int64_t in_c = k.mode == canvas::ReplicaMode::kSum ? c * k.replicas : c;
    std::vector<std::int64_t> in_dims = {in_c, a.constants.at(canvas::Constant::kH),
                                         a.constants.at(canvas::Constant::kW)};
    std::mt19937_64 rng(seed);
    const auto x = input.empty() ? canvas::random_tensor(in_dims, rng)
                                 : canvas::read_tensor_text(read_file(input), in_dims);

    std::vector<canvas::WeightMap> w(static_cast<std::size_t>(k.replicas));
    const auto shapes = canvas::weight_shapes(k.tmpl, a);
    if (weights.empty()) {
      for (auto& m : w) m = canvas::random_weights(k.tmpl, a, rng);
    } else {
      std::size_t total = 0;
      for (const auto& [e, dims] : shapes) total += canvas::DenseTensor::volume(dims);
      const std::string text = read_file(weights);
      const auto flat = total == 0 && text.find_first_not_of(" \t\r\n") == std::string::npos
                            ? canvas::DenseTensor{}
                            : canvas::read_tensor_text(
                                  text, {static_cast<std::int64_t>(total * w.size())});
      std::size_t at = 0;
      for (auto& m : w) {
        for (const auto& [e, dims] : shapes) {
          canvas::DenseTensor t(dims);
          std::copy_n(flat.data.begin() + static_cast<std::ptrdiff_t>(at), t.size(), t.data.begin());
          at += t.size();
          m[e] = std::move(t);
        }
      }
    }
    const auto r = canvas::execute(k, w, x);
    std::cout << "# dims";
    for (auto d : r.output.dims) std::cout << ' ' << d;
    std::cout << "\n" << canvas::write_tensor_text(r.output);
    std::cout << "# macs " << r.flops << "\n";
    std::cout << "# analytical_flops " << canvas::kernel_cost(k).flops << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- stats

struct StatsCmd {
  SamplerFlags sampler;
  std::size_t count = 100;
  std::string kernel;
  std::string assign;
  std::string backbone;

  int run() {
    if (!kernel.empty() && !backbone.empty()) return network_table();
    if (!kernel.empty()) return kernel_stats();
    auto cfg = sampler.config();
    cfg.track_calibration = true;
    canvas::Sampler s(cfg);
    std::vector<double> latencies;
    for (std::size_t i = 0; i < count; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      s.sample();
      latencies.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(latencies.begin(), latencies.end());
    const auto& st = s.stats();
    json report = {{"command", "stats"}, {"seed", cfg.seed}, {"config", sampler_config_json(cfg)},
                   {"counts", counts_json(st)}, {"steps", st.steps},
                   {"unconstrained_steps", st.unconstrained_steps},
                   {"median_latency_ms", latencies[latencies.size() / 2]}};
    double total_w = 0;
    for (double w : cfg.type_weights) total_w += w;
    for (auto c : canvas::kAllPrimitiveClasses) {
      const auto i = static_cast<std::size_t>(c);
      const double freq = st.unconstrained_steps
                              ? static_cast<double>(st.unconstrained_picks[i]) / st.unconstrained_steps
                              : 0.0;
      report["classes"][std::string(canvas::class_name(c))] = {
          {"expected", cfg.type_weights[i] / total_w}, {"observed", freq}};
    }
    std::cout << report.dump(2) << "\n";
    return kOk;
  }

  // Per-target and total cost of a solved template against its baseline.
  int network_table() {
    const auto doc = canvas::parse_ir_document(read_file(kernel));
    if (!doc.solution) {
      throw canvas::Error(canvas::ErrorCode::kInvalidArgument,
                          "kernel has no solution record; run `canvas solve` first");
    }
    const auto spec = canvas::load_backbone(backbone);
    const auto net = canvas::network_report(spec, doc.tmpl, doc.solution->g, doc.solution->x);
    auto ratio = [](std::int64_t a, std::int64_t b) { return b ? static_cast<double>(a) / b : 1.0; };
    std::printf("%-16s %-8s %14s %14s %8s %12s %12s %8s\n", "target", "replaced", "flops",
                "base_flops", "ratio", "params", "base_params", "ratio");
    for (const auto& row : net.targets) {
      std::printf("%-16s %-8s %14lld %14lld %8.4f %12lld %12lld %8.4f\n", row.name.c_str(),
                  row.replaced ? "yes" : "no", static_cast<long long>(row.kernel.flops),
                  static_cast<long long>(row.original.flops),
                  ratio(row.kernel.flops, row.original.flops),
                  static_cast<long long>(row.kernel.params),
                  static_cast<long long>(row.original.params),
                  ratio(row.kernel.params, row.original.params));
    }
    std::printf("%-16s %-8s %14lld %14lld %8.4f %12lld %12lld %8.4f\n", "total", "",
                static_cast<long long>(net.new_total.flops),
                static_cast<long long>(net.original_total.flops), net.flops_ratio,
                static_cast<long long>(net.new_total.params),
                static_cast<long long>(net.original_total.params), net.params_ratio);
    std::printf("ideal speedup %.4f, replaceable fraction %.4f\n", net.ideal_speedup,
                net.replaceable_frac);
    return kOk;
  }

  int kernel_stats() {
    const auto t = canvas::parse_ir(read_file(kernel));
    json report = {{"command", "stats"},
                   {"kernel", kernel},
                   {"nodes", t.dag.num_nodes()},
                   {"edges", t.dag.edges().size()},
                   {"iso_hash", hex(canvas::iso_hash(t.dag))},
                   {"diameter", canvas::undirected_diameter(t.dag)}};
    json vars = json::array();
    for (auto v : t.free_vars) vars.push_back(canvas::variable_name(v));
    report["vars"] = vars;
    if (!assign.empty()) {
      const auto c = canvas::template_cost(t.dag, canvas::parse_assignment(assign));
      report["flops"] = c.flops;
      report["params"] = c.params;
    }
    std::cout << report.dump(2) << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- emit

struct EmitCmd {
  std::string kernel;
  std::string format = "ir";
  std::string assign;
  std::string backbone;
  std::string target;
  bool no_normalize = false;
  std::string out;

  int run() {
    const auto k = load_concrete(kernel, assign, backbone, target);
    canvas::harness::EmitOptions opts;
    opts.normalize = !no_normalize;
    const auto text = canvas::harness::emit(
        k, format == "ir" ? canvas::harness::EmitFormat::kIr : canvas::harness::EmitFormat::kModuleSource,
        opts);
    if (out.empty()) {
      std::cout << text;
    } else {
      write_file(out, text);
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- search

struct SearchCmd {
  SamplerFlags sampler;
  std::string backbone;
  std::optional<double> flops_frac;
  std::optional<double> params_frac;
  std::string listen = "127.0.0.1:0";
  std::size_t max_kernels = 10;
  std::string report = "search-report";
  int epochs = 10;
  double theta = 0.5;
  int simulate_workers = 0;
  double timeout_s = 0;

  int run() {
    auto cfg = sampler.config();
    const std::string backbone_text = read_file(backbone);
    const auto spec = canvas::parse_backbone(backbone_text);
    const auto budget = canvas::budget_from_fractions(spec, flops_frac, params_frac);
    fs::create_directories(fs::path(report) / "kernels");

    // Sample until enough kernels survive the solver.
    canvas::Sampler s(cfg);
    std::uint64_t solver_discarded = 0;
    std::vector<std::pair<std::string, std::string>> tasks;  // id, ir
    std::mt19937_64 rng(cfg.seed);
    bool exhausted = false;
    while (tasks.size() < max_kernels) {
      canvas::KernelTemplate t;
      try {
        t = s.sample();
      } catch (const canvas::Error& e) {
        if (e.code() != canvas::ErrorCode::kExhausted) throw;
        exhausted = true;
        break;
      }
      canvas::SolveOptions opts;
      opts.seed = rng();
      const auto result = canvas::solve(t, spec, budget, opts);
      if (std::holds_alternative<canvas::Discarded>(result)) {
        ++solver_discarded;
        if (solver_discarded > 100 * max_kernels + 1000) {
          exhausted = true;
          break;
        }
        continue;
      }
      const std::string id = "k" + std::to_string(tasks.size());
      const std::string ir = canvas::emit_ir(t) + canvas::emit_solution(std::get<canvas::Solution>(result), spec);
      write_file(fs::path(report) / "kernels" / (id + ".cir"), ir);
      tasks.emplace_back(id, ir);
    }

    canvas::harness::DispatcherConfig dcfg;
    dcfg.theta = theta;
    dcfg.log = [](const std::string& m) { std::cerr << "[harness] " << m << "\n"; };
    canvas::harness::Dispatcher d(dcfg);
    for (const auto& [id, ir] : tasks) {
      canvas::harness::EvalTask task;
      task.task_id = id;
      task.kernel_ir = ir;
      task.backbone = backbone_text;
      task.epochs = epochs;
      d.submit(std::move(task));
    }
    const auto [host, port] = canvas::harness::parse_endpoint(listen);
    const int bound = d.listen(host, port);
    std::cerr << "listening on " << host << ":" << bound << "\n";
    std::vector<std::unique_ptr<canvas::harness::SimulatedWorker>> sims;
    for (int i = 0; i < simulate_workers; ++i) {
      auto w = std::make_unique<canvas::harness::SimulatedWorker>(canvas::harness::connect_tcp(host, bound),
                                                                  canvas::harness::SimulatedWorkerConfig{});
      w->start();
      sims.push_back(std::move(w));
    }
    const bool finished =
        tasks.empty() || (timeout_s > 0 ? d.run(std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000)))
                                        : d.run());
    for (auto& w : sims) w->join();

    auto counts = s.stats();
    counts.discarded += solver_discarded;
    counts.accepted -= solver_discarded;
    json out = {{"command", "search"},
                {"seed", cfg.seed},
                {"config", sampler_config_json(cfg)},
                {"counts", counts_json(counts)},
                {"finished", finished}};
    out["config"]["backbone"] = backbone;
    out["config"]["max_kernels"] = max_kernels;
    out["config"]["epochs"] = epochs;
    out["config"]["theta"] = theta;
    if (budget.max_flops) out["config"]["max_flops"] = *budget.max_flops;
    if (budget.max_params) out["config"]["max_params"] = *budget.max_params;
    json board = json::array();
    for (const auto& e : d.leaderboard()) {
      json row = {{"task_id", e.task_id},
                  {"status", canvas::harness::task_status_name(e.status)},
                  {"curve", e.curve},
                  {"attempts", e.attempts}};
      row["accuracy"] = e.accuracy ? json(*e.accuracy) : json(nullptr);
      row["latency_ms"] = e.latency_ms ? json(*e.latency_ms) : json(nullptr);
      if (!e.reason.empty()) row["reason"] = e.reason;
      board.push_back(row);
    }
    out["leaderboard"] = board;
    write_file(fs::path(report) / "report.json", out.dump(2) + "\n");
    std::cout << "evaluated " << board.size() << " of " << tasks.size() << " kernel(s); report in " << report
              << "\n";
    if (tasks.empty() || !finished) return kExhaustedOrDiscarded;
    (void)exhausted;
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel architecture search over fine-grained primitives", "canvas"};
  app.set_version_flag("--version", std::string("canvas ") + CANVAS_VERSION);
  app.require_subcommand(1);

  SampleCmd sample;
  auto* s = app.add_subcommand("sample", "Sample kernel templates");
  sample.sampler.add(s);
  s->add_option("--count", sample.count, "Kernels to emit")->check(CLI::PositiveNumber);
  s->add_option("--jobs", sample.jobs, "Sampler threads")->check(CLI::PositiveNumber);
  s->add_option("--out", sample.out, "Output directory");

  SolveCmd solve;
  auto* so = app.add_subcommand("solve", "Resolve a template against a backbone budget");
  so->add_option("--backbone", solve.backbone, "Backbone JSON")->required();
  so->add_option("--kernel", solve.kernel, "Template IR")->required();
  so->add_option("--flops-frac", solve.flops_frac, "FLOPs budget as a fraction of the backbone");
  so->add_option("--params-frac", solve.params_frac, "Parameter budget as a fraction");
  so->add_option("--g", solve.g, "Group count G");
  so->add_option("--seed", solve.seed, "Seed for drawing G");
  so->add_option("--out", solve.out, "Write the IR with the solution here");
  so->add_option("--report", solve.report_path, "Write a JSON report here");

  InterpretCmd interp;
  auto* in = app.add_subcommand("interpret", "Execute a concrete kernel");
  in->add_option("--kernel", interp.kernel, "Kernel IR")->required();
  in->add_option("--assign", interp.assign, "Bindings, e.g. C=4,H=6,W=6,KH=3,KW=3,x1=8");
  in->add_option("--backbone", interp.backbone, "Backbone for a solved template");
  in->add_option("--target", interp.target, "Target name for a solved template");
  in->add_option("--input", interp.input, "Input tensor, whitespace-separated");
  in->add_option("--weights", interp.weights, "FC weights in edge order, whitespace-separated");
  in->add_option("--seed", interp.seed, "Seed for random input or weights");

  StatsCmd stats;
  auto* st = app.add_subcommand("stats", "Sampler calibration, or a summary of one kernel");
  stats.sampler.add(st);
  st->add_option("--count", stats.count, "Kernels to sample")->check(CLI::PositiveNumber);
  st->add_option("--kernel", stats.kernel, "Summarize this IR instead of sampling");
  st->add_option("--assign", stats.assign, "Bindings for the cost of --kernel");
  st->add_option("--backbone", stats.backbone, "Cost table of a solved --kernel on this backbone");

  EmitCmd emit;
  auto* em = app.add_subcommand("emit", "Emit a concrete kernel");
  em->add_option("--kernel", emit.kernel, "Kernel IR")->required();
  em->add_option("--format", emit.format, "ir or module-source")
      ->check(CLI::IsMember({"ir", "module-source"}));
  em->add_option("--assign", emit.assign, "Bindings for a template");
  em->add_option("--backbone", emit.backbone, "Backbone for a solved template");
  em->add_option("--target", emit.target, "Target name for a solved template");
  em->add_flag("--no-normalize", emit.no_normalize, "Skip batch norm after FC");
  em->add_option("--out", emit.out, "Output file");

  SearchCmd search;
  auto* se = app.add_subcommand("search", "Sample, solve and evaluate kernels on workers");
  search.sampler.add(se);
  se->add_option("--backbone", search.backbone, "Backbone JSON")->required();
  se->add_option("--budget-flops-frac", search.flops_frac, "FLOPs budget fraction");
  se->add_option("--budget-params-frac", search.params_frac, "Parameter budget fraction");
  se->add_option("--listen", search.listen, "HOST:PORT for workers");
  se->add_option("--max-kernels", search.max_kernels, "Kernels to evaluate");
  se->add_option("--report", search.report, "Report directory");
  se->add_option("--epochs", search.epochs, "Epochs per task")->check(CLI::PositiveNumber);
  se->add_option("--theta", search.theta, "Pruning strictness")->check(CLI::Range(0.0, 1.0));
  se->add_option("--simulate-workers", search.simulate_workers, "In-process scripted workers");
  se->add_option("--timeout", search.timeout_s, "Seconds before giving up (0 waits forever)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*s) return sample.run();
    if (*so) return solve.run();
    if (*in) return interp.run();
    if (*st) return stats.run();
    if (*em) return emit.run();
    if (*se) return search.run();
  } catch (const canvas::Error& e) {
    std::cerr << "canvas: " << e.what() << "\n";
    return e.code() == canvas::ErrorCode::kExhausted ? kExhaustedOrDiscarded : kValidation;
  } catch (const std::exception& e) {
    std::cerr << "canvas: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}
