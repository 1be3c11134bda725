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

#include "canvas/kernel_ir.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <vector>

#include "canvas/error.hpp"
#include "canvas/shape_solver.hpp"

namespace canvas {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == s.npos ? s.npos : pos - start)));
    if (pos == s.npos) break;
    start = pos + 1;
  }
  return out;
}

VariableId parse_var(std::string_view s, std::size_t line) {
  auto v = parse_dimension(s).variable();
  if (!v || parse_dimension(s) != Dimension::of(*v)) fail(line, "expected a variable, got '" + std::string(s) + "'");
  return *v;
}

struct RawEdge {
  std::string mnemonic;
  std::vector<std::size_t> inputs;
  std::size_t output = 0;
  std::size_t line = 0;
};

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

void emit_body(std::ostringstream& out, const KernelTemplate& t) {
  out << kIrHeader << '\n';
  for (const auto& n : t.notes) out << "# " << n << '\n';
  for (std::size_t i = 0; i < t.dag.num_nodes(); ++i) {
    out << 'n' << i << ": shape=" << t.dag.shape(i).render() << '\n';
  }
  for (const auto& e : t.dag.edges()) {
    out << "e: " << mnemonic(e.inst.kind) << " (" << join_ids(e.inputs) << ") -> " << e.output << '\n';
  }
  out << "vars:";
  for (std::size_t i = 0; i < t.free_vars.size(); ++i) {
    out << (i ? "," : " ") << variable_name(t.free_vars[i]);
  }
  out << '\n';
}

}  // namespace

std::string emit_ir(const KernelTemplate& t) {
  std::ostringstream out;
  emit_body(out, t);
  return out.str();
}

std::string emit_ir(const ConcreteKernel& k) {
  std::ostringstream out;
  emit_body(out, k.tmpl);
  out << "target: " << k.target << '\n';
  out << "assign: " << render(k.assignment) << '\n';
  out << "replicate: " << k.replicas << ' ' << replica_mode_name(k.mode) << '\n';
  return out.str();
}

std::string emit_solution(const Solution& s, const BackboneSpec& spec) {
  std::ostringstream out;
  out << "solution: G=" << s.g << " flops=" << s.achieved.flops << " params=" << s.achieved.params
      << " status=" << s.status << " iterations=" << s.iterations << '\n';
  std::map<std::size_t, Assignment> per_target;
  for (const auto& [key, v] : s.x) per_target[key.first].dynvars[key.second] = v;
  for (const auto& [index, a] : per_target) {
    out << "x: " << index << ' ' << render(a);
    if (index < spec.targets.size()) out << " # " << spec.targets[index].name;
    out << '\n';
  }
  return out.str();
}

IrDocument parse_ir_document(std::string_view text) {
  std::vector<std::string> notes;
  std::map<std::size_t, std::pair<Shape, std::size_t>> declared;
  std::vector<RawEdge> raw;
  std::optional<std::vector<VariableId>> vars;
  std::optional<std::string> target;
  std::optional<Assignment> assign;
  std::optional<std::pair<std::int64_t, ReplicaMode>> replicate;
  std::optional<Solution> solution;
  bool header = false;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    std::string_view line = trim(text.substr(start, end == text.npos ? text.npos : end - start));
    start = end == text.npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line != kIrHeader) fail(line_no, "expected '" + std::string(kIrHeader) + "'");
      header = true;
      continue;
    }
    if (consume(line, "#")) {
      notes.emplace_back(trim(line));
      continue;
    }
    try {
      if (consume(line, "e:")) {
        auto arrow = line.rfind(" -> ");
        if (arrow == line.npos) fail(line_no, "edge needs ' -> '");
        auto lhs = line.substr(0, arrow);
        auto open = lhs.rfind(" (");
        if (open == lhs.npos || lhs.back() != ')') fail(line_no, "edge needs '(inputs)'");
        RawEdge e;
        e.mnemonic = std::string(trim(lhs.substr(0, open)));
        for (auto id : split(lhs.substr(open + 2, lhs.size() - open - 3), ',')) {
          e.inputs.push_back(static_cast<std::size_t>(parse_int(id, line_no)));
        }
        e.output = static_cast<std::size_t>(parse_int(line.substr(arrow + 4), line_no));
        e.line = line_no;
        raw.push_back(std::move(e));
      } else if (consume(line, "vars:")) {
        vars.emplace();
        for (auto v : split(line, ',')) vars->push_back(parse_var(v, line_no));
      } else if (consume(line, "target:")) {
        target = std::string(trim(line));
      } else if (consume(line, "assign:")) {
        assign = parse_assignment(trim(line));
      } else if (consume(line, "replicate:")) {
        auto parts = split(trim(line), ' ');
        if (parts.size() != 2) fail(line_no, "replicate needs '<r> <mode>'");
        ReplicaMode mode;
        if (parts[1] == "single") {
          mode = ReplicaMode::kSingle;
        } else if (parts[1] == "concat") {
          mode = ReplicaMode::kConcat;
        } else if (parts[1] == "sum") {
          mode = ReplicaMode::kSum;
        } else {
          fail(line_no, "unknown replica mode '" + std::string(parts[1]) + "'");
        }
        replicate = {parse_int(parts[0], line_no), mode};
      } else if (consume(line, "solution:")) {
        solution.emplace();
        for (auto item : split(trim(line), ' ')) {
          auto eq = item.find('=');
          if (eq == item.npos) fail(line_no, "solution field needs '='");
          auto key = item.substr(0, eq);
          auto value = item.substr(eq + 1);
          if (key == "G") {
            solution->g = parse_int(value, line_no);
          } else if (key == "flops") {
            solution->achieved.flops = parse_int(value, line_no);
          } else if (key == "params") {
            solution->achieved.params = parse_int(value, line_no);
          } else if (key == "status") {
            solution->status = std::string(value);
          } else if (key == "iterations") {
            solution->iterations = static_cast<int>(parse_int(value, line_no));
          } else {
            fail(line_no, "unknown solution field '" + std::string(key) + "'");
          }
        }
      } else if (consume(line, "x:")) {
        if (!solution) fail(line_no, "'x:' before 'solution:'");
        auto comment = line.find('#');
        auto parts = split(trim(line.substr(0, comment)), ' ');
        if (parts.size() != 2) fail(line_no, "x needs '<target> <values>'");
        const auto index = static_cast<std::size_t>(parse_int(parts[0], line_no));
        for (const auto& [v, value] : parse_assignment(parts[1]).dynvars) {
          solution->x[{index, v}] = value;
        }
      } else if (consume(line, "n")) {
        auto colon = line.find(':');
        if (colon == line.npos) fail(line_no, "node needs ':'");
        const auto id = static_cast<std::size_t>(parse_int(line.substr(0, colon), line_no));
        auto rest = trim(line.substr(colon + 1));
        if (!consume(rest, "shape=")) fail(line_no, "node needs 'shape='");
        if (!declared.emplace(id, std::make_pair(parse_shape(trim(rest)), line_no)).second) {
          fail(line_no, "duplicate node n" + std::to_string(id));
        }
      } else {
        fail(line_no, "unrecognized line '" + std::string(line) + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse && std::string_view(e.what()).find("line ") != std::string_view::npos) {
        throw;
      }
      fail(line_no, e.what());
    }
  }
  if (!header) throw Error(ErrorCode::kParse, "empty kernel IR");

  // Substitutions the blends may call for.
  std::map<VariableId, Dimension> pending;
  for (const auto& n : notes) {
    std::string_view s = n;
    if (!consume(s, "subst:")) continue;
    auto assign_pos = s.find(":=");
    if (assign_pos == s.npos) throw Error(ErrorCode::kParse, "bad note '" + n + "'");
    pending[parse_var(trim(s.substr(0, assign_pos)), 0)] = parse_dimension(trim(s.substr(assign_pos + 2)));
  }

  std::sort(raw.begin(), raw.end(), [](const RawEdge& a, const RawEdge& b) { return a.output < b.output; });
  if (declared.size() != raw.size() + 1) {
    throw Error(ErrorCode::kParse, std::to_string(declared.size()) + " nodes but " +
                                       std::to_string(raw.size()) + " edges");
  }
  auto check_declared = [&](const MicroDag& dag, std::size_t id,
                            const std::vector<std::pair<VariableId, Dimension>>& applied) {
    auto it = declared.find(id);
    if (it == declared.end()) throw Error(ErrorCode::kParse, "node n" + std::to_string(id) + " is not declared");
    Shape want = it->second.first;
    for (const auto& [v, expr] : applied) want = substitute(want, v, expr);
    if (!(want == dag.shape(id))) {
      throw Error(ErrorCode::kShapeMismatch, "line " + std::to_string(it->second.second) + ": n" +
                                                 std::to_string(id) + " declared " + want.render() +
                                                 " but edges produce " + dag.shape(id).render());
    }
  };

  MicroDag dag = MicroDag::input_only();
  std::vector<std::pair<VariableId, Dimension>> applied;
  check_declared(dag, 0, applied);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const RawEdge& e = raw[k];
    if (e.output != k + 1) fail(e.line, "edge must produce n" + std::to_string(k + 1));
    for (auto in : e.inputs) {
      if (in > k) fail(e.line, "input n" + std::to_string(in) + " is not yet defined");
    }
    PrimitiveKind kind;
    try {
      kind = parse_mnemonic(e.mnemonic);
    } catch (const Error& err) {
      fail(e.line, err.what());
    }
    if (std::holds_alternative<Broadcast>(kind) && e.inputs.size() == 2) {
      auto m = match_broadcast(dag.shape(e.inputs[0]), dag.shape(e.inputs[1]));
      if (m && !m->legal_without_substitution && m->lhs_var) {
        auto it = pending.find(*m->lhs_var);
        if (it == pending.end()) {
          fail(e.line, "blend needs a substitution for " + variable_name(*m->lhs_var));
        }
        if (std::find(m->substitutions.begin(), m->substitutions.end(), it->second) ==
            m->substitutions.end()) {
          fail(e.line, "substitution " + variable_name(it->first) + " := " + it->second.render() +
                           " does not satisfy the blend");
        }
        dag = apply_substitution(dag, it->first, it->second);
        applied.emplace_back(it->first, it->second);
      }
    }
    std::vector<Shape> shapes;
    for (auto in : e.inputs) shapes.push_back(dag.shape(in));
    try {
      dag = std::move(dag).grow(make_instance(std::move(kind), std::move(shapes)), e.inputs);
    } catch (const Error& err) {
      fail(e.line, err.what());
    }
    check_declared(dag, k + 1, applied);
  }

  IrDocument doc;
  doc.tmpl = finalize(std::move(dag), std::move(notes));
  if (vars && *vars != doc.tmpl.free_vars) {
    throw Error(ErrorCode::kParse, "declared vars do not match the free variables of the kernel");
  }
  if (assign) {
    ConcreteKernel k;
    k.tmpl = doc.tmpl;
    k.assignment = std::move(*assign);
    if (replicate) {
      k.replicas = replicate->first;
      k.mode = replicate->second;
    }
    k.target = target.value_or("");
    doc.concrete = std::move(k);
  }
  doc.solution = std::move(solution);
  return doc;
}

KernelTemplate parse_ir(std::string_view text) { return parse_ir_document(text).tmpl; }

ConcreteKernel parse_concrete_ir(std::string_view text) {
  auto doc = parse_ir_document(text);
  if (!doc.concrete) throw Error(ErrorCode::kParse, "kernel IR has no 'assign:' line");
  return std::move(*doc.concrete);
}

}  // namespace canvas
