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

// Dispatches evaluation tasks to connected workers.
//
// One event-loop thread (the caller of run()) owns the task queue, the
// leaderboard and the best curve. Each connection has a reader thread that
// only forwards decoded lines to the loop. Tasks held by a worker that
// disconnects go back to the front of the queue; results are recorded once
// per task_id.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "canvas/harness/channel.hpp"
#include "canvas/harness/protocol.hpp"
#include "canvas/harness/prune.hpp"

namespace canvas::harness {

struct EvalTask {
  std::string task_id;
  std::string kernel_ir;
  std::string backbone;  // JSON text, may be empty
  int epochs = 1;
  TaskKind kind = TaskKind::kAccuracy;
};

enum class TaskStatus { kCompleted, kPruned, kFailed };
std::string_view task_status_name(TaskStatus s);

struct LeaderboardEntry {
  std::string task_id;
  TaskStatus status = TaskStatus::kCompleted;
  std::optional<double> accuracy;
  std::optional<double> latency_ms;
  AccuracyCurve curve;
  std::string reason;
  int attempts = 0;
};

struct DispatchStats {
  int dispatched = 0;
  int requeued = 0;
  int completed = 0;
  int pruned = 0;
  int failed = 0;
  int malformed = 0;
  int workers_seen = 0;
  int workers_lost = 0;  // disconnects while holding an open task
};

struct DispatcherConfig {
  double theta = 0.5;
  // A task lost this many times is recorded as failed.
  int max_attempts = 5;
  std::function<void(const std::string&)> log;
};

class Dispatcher {
 public:
  explicit Dispatcher(DispatcherConfig cfg = {});
  ~Dispatcher();

  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  // Throws Error(kInvalidArgument) on a duplicate task_id.
  void submit(EvalTask task);

  // Adds a worker connection; safe from any thread.
  void attach(int fd);

  // Accepts workers in the background. Returns the bound port.
  int listen(const std::string& host, int port);

  // Runs the event loop until every submitted task has a leaderboard entry
  // or `timeout` passes. Returns true when all tasks finished. Workers are
  // sent `bye` at the end.
  bool run(std::chrono::milliseconds timeout = std::chrono::hours(24 * 365));

  // Completed entries first, then by accuracy (desc), latency (asc), id.
  std::vector<LeaderboardEntry> leaderboard() const;
  PruneRule prune_rule() const;
  DispatchStats stats() const;

 private:
  struct Event {
    enum class Kind { kLine, kClosed } kind;
    int conn = 0;
    std::string line;
  };
  struct Connection {
    std::unique_ptr<LineChannel> channel;
    std::thread reader;
    bool greeted = false;
    std::optional<std::string> task;
    bool dropped = false;
  };

  void push(Event e);
  void handle(const Event& e);
  void handle_message(int conn, const Message& m);
  void drop(int conn, const std::string& why);
  void close_connection(int conn);
  void assign();
  void record(LeaderboardEntry entry);
  void release_task(const std::string& task_id);
  void log(const std::string& msg) const;
  void stop_listener();

  DispatcherConfig cfg_;

  std::mutex events_mu_;
  std::condition_variable events_cv_;
  std::deque<Event> events_;
  std::deque<int> new_conns_;
  int next_conn_ = 0;
  std::map<int, std::unique_ptr<Connection>> pending_conns_;  // guarded by events_mu_

  // Loop-owned state.
  std::map<int, std::unique_ptr<Connection>> conns_;
  std::map<std::string, EvalTask> tasks_;
  std::deque<std::string> queue_;
  std::map<std::string, AccuracyCurve> curves_;
  std::map<std::string, int> attempts_;
  std::map<std::string, LeaderboardEntry> board_;
  double best_accuracy_ = -1;

  mutable std::mutex snapshot_mu_;  // guards the copies read by accessors
  PruneRule rule_;
  DispatchStats stats_;

  int listen_fd_ = -1;
  std::thread acceptor_;
};

}  // namespace canvas::harness
