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

#include "canvas/harness/simulated_worker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "canvas/error.hpp"

namespace canvas::harness {

AccuracyCurve default_curve(const Message& task) {
  const std::size_t h = std::hash<std::string>{}(task.kernel_ir.value_or(*task.task_id));
  const double level = 0.3 + 0.6 * static_cast<double>(h % 1000) / 1000.0;
  const int epochs = task.epochs.value_or(1);
  AccuracyCurve c;
  for (int e = 1; e <= epochs; ++e) {
    c.push_back(level * (1.0 - std::exp(-3.0 * e / epochs)) / (1.0 - std::exp(-3.0)));
  }
  return c;
}

SimulatedWorker::SimulatedWorker(int fd, SimulatedWorkerConfig cfg)
    : channel_(fd), cfg_(std::move(cfg)) {
  if (!cfg_.curve) cfg_.curve = default_curve;
}

SimulatedWorker::~SimulatedWorker() {
  channel_.shutdown();
  join();
}

void SimulatedWorker::start() {
  thread_ = std::thread([this] { serve(); });
}

void SimulatedWorker::join() {
  if (thread_.joinable()) thread_.join();
}

void SimulatedWorker::serve() {
  if (!channel_.write_line(encode(hello()))) return;
  bool first_task = true;
  std::string line;
  while (channel_.read_line(line) == LineChannel::ReadStatus::kLine) {
    Message m;
    try {
      m = decode(line);
    } catch (const Error&) {
      return;
    }
    if (m.type == MessageType::kBye) return;
    if (m.type != MessageType::kTask) continue;

    const std::string id = *m.task_id;
    const int epochs = *m.epochs;
    if (m.kind == TaskKind::kLatency) {
      std::this_thread::sleep_for(cfg_.epoch_time);
      channel_.write_line(encode(result(id, std::nullopt, cfg_.latency_ms)));
      ++tasks_finished_;
      continue;
    }
    const AccuracyCurve curve = cfg_.curve(m);
    double best = 0;
    bool pruned = false;
    for (int e = 1; e <= epochs && !pruned; ++e) {
      if (first_task && cfg_.die_after_epochs && e > *cfg_.die_after_epochs) {
        died_ = true;
        channel_.abort();
        return;
      }
      // Training time; a prune may arrive meanwhile.
      std::string incoming;
      const auto until = std::chrono::steady_clock::now() + cfg_.epoch_time;
      while (true) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            until - std::chrono::steady_clock::now());
        auto st = channel_.read_line(incoming, std::max(left, std::chrono::milliseconds(0)));
        if (st == LineChannel::ReadStatus::kClosed) return;
        if (st == LineChannel::ReadStatus::kTimeout) break;
        try {
          Message in = decode(incoming);
          if (in.type == MessageType::kBye) return;
          if (in.type == MessageType::kPrune && in.task_id == id) pruned = true;
        } catch (const Error&) {
          return;
        }
      }
      if (pruned) break;
      const double acc = curve.at(static_cast<std::size_t>(e - 1));
      best = std::max(best, acc);
      channel_.write_line(encode(progress(id, e, acc)));
      ++progress_sent_;
    }
    // A prune can also land right after the last progress record.
    std::string incoming;
    while (!pruned && channel_.read_line(incoming, std::chrono::milliseconds(0)) ==
                          LineChannel::ReadStatus::kLine) {
      try {
        Message in = decode(incoming);
        if (in.type == MessageType::kPrune && in.task_id == id) pruned = true;
        if (in.type == MessageType::kBye) return;
      } catch (const Error&) {
        return;
      }
    }
    if (pruned) ++prunes_received_;
    first_task = false;
    channel_.write_line(encode(result(id, best, cfg_.latency_ms,
                                      pruned ? std::optional<std::string>("pruned") : std::nullopt)));
    ++tasks_finished_;
  }
}

}  // namespace canvas::harness
