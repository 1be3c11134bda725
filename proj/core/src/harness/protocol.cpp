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

#include "canvas/harness/protocol.hpp"

#include <cmath>
#include <json.hpp>

#include "canvas/error.hpp"

namespace canvas::harness {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kProtocol, msg); }

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
void require(const std::optional<T>& v, const char* key, MessageType t) {
  if (!v) bad(std::string(message_type_name(t)) + " needs '" + key + "'");
}

}  // namespace

std::string_view message_type_name(MessageType t) {
  switch (t) {
    case MessageType::kHello: return "hello";
    case MessageType::kTask: return "task";
    case MessageType::kProgress: return "progress";
    case MessageType::kPrune: return "prune";
    case MessageType::kResult: return "result";
    case MessageType::kBye: return "bye";
  }
  return "?";
}

std::string_view task_kind_name(TaskKind k) {
  return k == TaskKind::kAccuracy ? "accuracy" : "latency";
}

std::string encode(const Message& m) {
  json j;
  j["type"] = message_type_name(m.type);
  if (m.task_id) j["task_id"] = *m.task_id;
  if (m.kernel_ir) j["kernel_ir"] = *m.kernel_ir;
  if (m.epochs) j["epochs"] = *m.epochs;
  if (m.epoch) j["epoch"] = *m.epoch;
  if (m.accuracy) j["accuracy"] = *m.accuracy;
  if (m.latency_ms) j["latency_ms"] = *m.latency_ms;
  if (m.reason) j["reason"] = *m.reason;
  if (m.backbone) j["backbone"] = *m.backbone;
  if (m.kind) j["kind"] = task_kind_name(*m.kind);
  return j.dump();
}

Message decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    bad(std::string("not a JSON record: ") + e.what());
  }
  if (!j.is_object()) bad("record is not an object");
  std::optional<std::string> type;
  read(j, "type", type);
  if (!type) bad("record has no 'type'");
  Message m;
  if (*type == "hello") {
    m.type = MessageType::kHello;
  } else if (*type == "task") {
    m.type = MessageType::kTask;
  } else if (*type == "progress") {
    m.type = MessageType::kProgress;
  } else if (*type == "prune") {
    m.type = MessageType::kPrune;
  } else if (*type == "result") {
    m.type = MessageType::kResult;
  } else if (*type == "bye") {
    m.type = MessageType::kBye;
  } else {
    bad("unknown type '" + *type + "'");
  }
  read(j, "task_id", m.task_id);
  read(j, "kernel_ir", m.kernel_ir);
  read(j, "epochs", m.epochs);
  read(j, "epoch", m.epoch);
  read(j, "accuracy", m.accuracy);
  read(j, "latency_ms", m.latency_ms);
  read(j, "reason", m.reason);
  read(j, "backbone", m.backbone);
  std::optional<std::string> kind;
  read(j, "kind", kind);
  if (kind) {
    if (*kind == "accuracy") {
      m.kind = TaskKind::kAccuracy;
    } else if (*kind == "latency") {
      m.kind = TaskKind::kLatency;
    } else {
      bad("unknown task kind '" + *kind + "'");
    }
  }
  switch (m.type) {
    case MessageType::kTask:
      require(m.task_id, "task_id", m.type);
      require(m.kernel_ir, "kernel_ir", m.type);
      require(m.epochs, "epochs", m.type);
      break;
    case MessageType::kProgress:
      require(m.task_id, "task_id", m.type);
      require(m.epoch, "epoch", m.type);
      require(m.accuracy, "accuracy", m.type);
      break;
    case MessageType::kPrune:
    case MessageType::kResult:
      require(m.task_id, "task_id", m.type);
      break;
    default:
      break;
  }
  if (m.accuracy && !(std::isfinite(*m.accuracy) && *m.accuracy >= 0.0 && *m.accuracy <= 1.0)) {
    bad("accuracy outside [0, 1]");
  }
  if (m.epochs && *m.epochs < 1) bad("epochs must be positive");
  return m;
}

Message hello() { return Message{}; }

Message bye() {
  Message m;
  m.type = MessageType::kBye;
  return m;
}

Message prune(std::string task_id, std::string reason) {
  Message m;
  m.type = MessageType::kPrune;
  m.task_id = std::move(task_id);
  m.reason = std::move(reason);
  return m;
}

Message progress(std::string task_id, int epoch, double accuracy) {
  Message m;
  m.type = MessageType::kProgress;
  m.task_id = std::move(task_id);
  m.epoch = epoch;
  m.accuracy = accuracy;
  return m;
}

Message result(std::string task_id, std::optional<double> accuracy, std::optional<double> latency_ms,
               std::optional<std::string> reason) {
  Message m;
  m.type = MessageType::kResult;
  m.task_id = std::move(task_id);
  m.accuracy = accuracy;
  m.latency_ms = latency_ms;
  m.reason = std::move(reason);
  return m;
}

}  // namespace canvas::harness
