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

#include "canvas/harness/dispatcher.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <sstream>

#include "canvas/error.hpp"

namespace canvas::harness {

std::string_view task_status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::kCompleted: return "completed";
    case TaskStatus::kPruned: return "pruned";
    case TaskStatus::kFailed: return "failed";
  }
  return "?";
}

Dispatcher::Dispatcher(DispatcherConfig cfg) : cfg_(std::move(cfg)) { rule_.theta = cfg_.theta; }

Dispatcher::~Dispatcher() {
  stop_listener();
  {
    std::lock_guard lock(events_mu_);
    for (auto& [id, c] : pending_conns_) conns_[id] = std::move(c);
    pending_conns_.clear();
  }
  for (auto& [id, c] : conns_) c->channel->shutdown();
  for (auto& [id, c] : conns_) {
    if (c->reader.joinable()) c->reader.join();
  }
}

void Dispatcher::submit(EvalTask task) {
  if (tasks_.count(task.task_id)) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate task_id '" + task.task_id + "'");
  }
  if (task.epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be positive");
  queue_.push_back(task.task_id);
  tasks_.emplace(task.task_id, std::move(task));
}

void Dispatcher::attach(int fd) {
  auto conn = std::make_unique<Connection>();
  conn->channel = std::make_unique<LineChannel>(fd);
  std::lock_guard lock(events_mu_);
  const int id = next_conn_++;
  LineChannel* ch = conn->channel.get();
  conn->reader = std::thread([this, id, ch] {
    std::string line;
    while (ch->read_line(line) == LineChannel::ReadStatus::kLine) {
      push({Event::Kind::kLine, id, std::move(line)});
      line.clear();
    }
    push({Event::Kind::kClosed, id, {}});
  });
  pending_conns_[id] = std::move(conn);
  new_conns_.push_back(id);
  events_cv_.notify_one();
}

int Dispatcher::listen(const std::string& host, int port) {
  auto [fd, bound] = listen_tcp(host, port);
  listen_fd_ = fd;
  acceptor_ = std::thread([this, fd] {
    while (true) {
      const int c = ::accept(fd, nullptr, nullptr);
      if (c < 0) {
        if (errno == EINTR) continue;
        return;
      }
      attach(c);
    }
  });
  log("listening on " + host + ":" + std::to_string(bound));
  return bound;
}

void Dispatcher::stop_listener() {
  if (listen_fd_ < 0) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
}

void Dispatcher::push(Event e) {
  std::lock_guard lock(events_mu_);
  events_.push_back(std::move(e));
  events_cv_.notify_one();
}

void Dispatcher::log(const std::string& msg) const {
  if (cfg_.log) cfg_.log(msg);
}

bool Dispatcher::run(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool done = false;
  while (true) {
    std::deque<Event> batch;
    {
      std::unique_lock lock(events_mu_);
      while (!new_conns_.empty()) {
        const int id = new_conns_.front();
        new_conns_.pop_front();
        conns_[id] = std::move(pending_conns_.at(id));
        pending_conns_.erase(id);
      }
      batch.swap(events_);
    }
    for (const auto& e : batch) handle(e);
    assign();
    if (board_.size() == tasks_.size()) {
      done = true;
      break;
    }
    std::unique_lock lock(events_mu_);
    if (events_.empty() && new_conns_.empty() &&
        !events_cv_.wait_until(lock, deadline, [&] { return !events_.empty() || !new_conns_.empty(); })) {
      break;
    }
  }
  // Release every worker; late events are discarded.
  for (auto& [id, c] : conns_) {
    c->channel->write_line(encode(bye()));
    c->channel->shutdown();
  }
  for (auto& [id, c] : conns_) {
    if (c->reader.joinable()) c->reader.join();
  }
  conns_.clear();
  {
    std::lock_guard lock(events_mu_);
    events_.clear();
  }
  if (!done) log("run stopped with " + std::to_string(tasks_.size() - board_.size()) + " task(s) open");
  return done;
}

void Dispatcher::handle(const Event& e) {
  auto it = conns_.find(e.conn);
  if (it == conns_.end()) return;
  if (e.kind == Event::Kind::kClosed) {
    close_connection(e.conn);
    return;
  }
  if (it->second->dropped) return;
  Message m;
  try {
    m = decode(e.line);
  } catch (const Error& err) {
    std::lock_guard lock(snapshot_mu_);
    ++stats_.malformed;
    drop(e.conn, err.what());
    return;
  }
  handle_message(e.conn, m);
}

void Dispatcher::drop(int conn, const std::string& why) {
  log("dropping worker " + std::to_string(conn) + ": " + why);
  auto& c = conns_.at(conn);
  c->dropped = true;
  c->channel->shutdown();
}

void Dispatcher::close_connection(int conn) {
  auto node = conns_.extract(conn);
  auto& c = node.mapped();
  if (c->reader.joinable()) c->reader.join();
  std::lock_guard lock(snapshot_mu_);
  if (!c->task || board_.count(*c->task)) return;
  ++stats_.workers_lost;
  const std::string& id = *c->task;
  if (attempts_[id] >= cfg_.max_attempts) {
    LeaderboardEntry entry;
    entry.task_id = id;
    entry.status = TaskStatus::kFailed;
    entry.curve = curves_[id];
    entry.reason = "worker lost " + std::to_string(attempts_[id]) + " time(s)";
    entry.attempts = attempts_[id];
    board_[id] = std::move(entry);
    ++stats_.failed;
    return;
  }
  log("requeueing " + id + " after losing worker " + std::to_string(conn));
  queue_.push_front(id);
  ++stats_.requeued;
}

void Dispatcher::handle_message(int conn, const Message& m) {
  auto& c = *conns_.at(conn);
  switch (m.type) {
    case MessageType::kHello:
      if (!c.greeted) {
        c.greeted = true;
        std::lock_guard lock(snapshot_mu_);
        ++stats_.workers_seen;
      }
      return;
    case MessageType::kBye:
      drop(conn, "worker said bye");
      return;
    case MessageType::kTask:
    case MessageType::kPrune: {
      std::lock_guard lock(snapshot_mu_);
      ++stats_.malformed;
      drop(conn, std::string(message_type_name(m.type)) + " is not a worker message");
      return;
    }
    case MessageType::kProgress:
    case MessageType::kResult:
      break;
  }
  const std::string& id = *m.task_id;
  std::lock_guard lock(snapshot_mu_);
  if (c.task != id) {
    if (board_.count(id)) return;  // late report for a closed task
    ++stats_.malformed;
    drop(conn, "report for unassigned task '" + id + "'");
    return;
  }
  if (m.type == MessageType::kResult) c.task.reset();
  if (board_.count(id)) return;
  const EvalTask& task = tasks_.at(id);
  AccuracyCurve& curve = curves_[id];

  if (m.type == MessageType::kProgress) {
    const int epoch = *m.epoch;
    if (epoch <= static_cast<int>(curve.size())) return;  // duplicate
    if (epoch != static_cast<int>(curve.size()) + 1 || epoch > task.epochs) {
      ++stats_.malformed;
      drop(conn, "unexpected epoch " + std::to_string(epoch) + " for " + id);
      return;
    }
    curve.push_back(*m.accuracy);
    if (task.kind == TaskKind::kAccuracy &&
        prune_decision(rule_, curve, epoch, task.epochs) == PruneDecision::kPrune) {
      std::ostringstream why;
      why << "accuracy " << curve.back() << " below " << prune_threshold(rule_, epoch, task.epochs)
          << " at epoch " << epoch;
      c.channel->write_line(encode(prune(id, why.str())));
      LeaderboardEntry entry;
      entry.task_id = id;
      entry.status = TaskStatus::kPruned;
      entry.accuracy = curve.back();
      entry.curve = curve;
      entry.reason = why.str();
      entry.attempts = attempts_[id];
      board_[id] = std::move(entry);
      ++stats_.pruned;
      log("pruned " + id + ": " + why.str());
    }
    return;
  }

  LeaderboardEntry entry;
  entry.task_id = id;
  entry.accuracy = m.accuracy;
  entry.latency_ms = m.latency_ms;
  entry.curve = curve;
  entry.reason = m.reason.value_or("");
  entry.attempts = attempts_[id];
  if (!m.accuracy && !m.latency_ms) {
    entry.status = TaskStatus::kFailed;
    ++stats_.failed;
  } else {
    entry.status = TaskStatus::kCompleted;
    ++stats_.completed;
    if (task.kind == TaskKind::kAccuracy && m.accuracy && *m.accuracy > best_accuracy_) {
      best_accuracy_ = *m.accuracy;
      if (!curve.empty()) rule_.best_curve = curve;
    }
  }
  board_[id] = std::move(entry);
}

void Dispatcher::assign() {
  for (auto& [id, c] : conns_) {
    if (queue_.empty()) return;
    if (!c->greeted || c->task || c->dropped) continue;
    const std::string task_id = queue_.front();
    queue_.pop_front();
    const EvalTask& t = tasks_.at(task_id);
    Message m;
    m.type = MessageType::kTask;
    m.task_id = t.task_id;
    m.kernel_ir = t.kernel_ir;
    m.epochs = t.epochs;
    m.kind = t.kind;
    if (!t.backbone.empty()) m.backbone = t.backbone;
    std::lock_guard lock(snapshot_mu_);
    curves_[task_id].clear();
    ++attempts_[task_id];
    c->task = task_id;
    ++stats_.dispatched;
    if (!c->channel->write_line(encode(m))) {
      // The close event requeues the task.
      c->dropped = true;
      c->channel->shutdown();
    }
  }
}

std::vector<LeaderboardEntry> Dispatcher::leaderboard() const {
  std::vector<LeaderboardEntry> out;
  {
    std::lock_guard lock(snapshot_mu_);
    for (const auto& [id, e] : board_) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    const bool ca = a.status == TaskStatus::kCompleted, cb = b.status == TaskStatus::kCompleted;
    if (ca != cb) return ca;
    const double aa = a.accuracy.value_or(-1), ab = b.accuracy.value_or(-1);
    if (aa != ab) return aa > ab;
    const double la = a.latency_ms.value_or(1e300), lb = b.latency_ms.value_or(1e300);
    if (la != lb) return la < lb;
    return a.task_id < b.task_id;
  });
  return out;
}

PruneRule Dispatcher::prune_rule() const {
  std::lock_guard lock(snapshot_mu_);
  return rule_;
}

DispatchStats Dispatcher::stats() const {
  std::lock_guard lock(snapshot_mu_);
  return stats_;
}

}  // namespace canvas::harness
