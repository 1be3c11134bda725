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

// Worker wire protocol: one JSON object per line.
//
//   worker -> harness   {"type":"hello"}
//   harness -> worker   {"type":"task","task_id":"t3","kernel_ir":"...","epochs":10,
//                        "kind":"accuracy","backbone":"{...}"}
//   worker -> harness   {"type":"progress","task_id":"t3","epoch":1,"accuracy":0.41}
//   harness -> worker   {"type":"prune","task_id":"t3","reason":"..."}
//   worker -> harness   {"type":"result","task_id":"t3","accuracy":0.62,"latency_ms":1.5}
//   harness -> worker   {"type":"bye"}

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace canvas::harness {

enum class MessageType { kHello, kTask, kProgress, kPrune, kResult, kBye };
enum class TaskKind { kAccuracy, kLatency };

std::string_view message_type_name(MessageType t);
std::string_view task_kind_name(TaskKind k);

struct Message {
  MessageType type = MessageType::kHello;
  std::optional<std::string> task_id;
  std::optional<std::string> kernel_ir;
  std::optional<int> epochs;
  std::optional<int> epoch;
  std::optional<double> accuracy;
  std::optional<double> latency_ms;
  std::optional<std::string> reason;
  std::optional<std::string> backbone;
  std::optional<TaskKind> kind;

  friend bool operator==(const Message&, const Message&) = default;
};

// Single line, no trailing newline.
std::string encode(const Message& m);

// Throws Error(kProtocol) on malformed records or missing required fields.
Message decode(std::string_view line);

Message hello();
Message bye();
Message prune(std::string task_id, std::string reason);
Message progress(std::string task_id, int epoch, double accuracy);
Message result(std::string task_id, std::optional<double> accuracy, std::optional<double> latency_ms,
               std::optional<std::string> reason = std::nullopt);

}  // namespace canvas::harness
