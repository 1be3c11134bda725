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

// A scripted worker that speaks the wire protocol without training
// anything. Used by tests and by the mock_worker tool.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "canvas/harness/channel.hpp"
#include "canvas/harness/protocol.hpp"
#include "canvas/harness/prune.hpp"

namespace canvas::harness {

struct SimulatedWorkerConfig {
  std::chrono::milliseconds epoch_time{0};
  // Accuracy per epoch for a task; defaults to default_curve().
  std::function<AccuracyCurve(const Message& task)> curve;
  // Drop the connection without a word after sending this many progress
  // records of the first task.
  std::optional<int> die_after_epochs;
  double latency_ms = 1.0;
};

// Saturating curve whose level is a hash of the kernel IR.
AccuracyCurve default_curve(const Message& task);

class SimulatedWorker {
 public:
  // Takes ownership of `fd`.
  SimulatedWorker(int fd, SimulatedWorkerConfig cfg);
  ~SimulatedWorker();

  void start();
  // Runs on the calling thread until `bye`, disconnect or death.
  void serve();
  void join();

  int tasks_finished() const { return tasks_finished_; }
  int progress_sent() const { return progress_sent_; }
  int prunes_received() const { return prunes_received_; }
  bool died() const { return died_; }

 private:
  LineChannel channel_;
  SimulatedWorkerConfig cfg_;
  std::thread thread_;
  std::atomic<int> tasks_finished_{0};
  std::atomic<int> progress_sent_{0};
  std::atomic<int> prunes_received_{0};
  std::atomic<bool> died_{false};
};

}  // namespace canvas::harness
