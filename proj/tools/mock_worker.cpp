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

// Scripted evaluation worker: connects to `canvas search`, reports a
// synthetic accuracy curve per task and honors prune messages.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "canvas/error.hpp"
#include "canvas/harness/channel.hpp"
#include "canvas/harness/simulated_worker.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Scripted worker for the canvas harness", "mock_worker"};
  std::string connect;
  int epoch_ms = 0;
  std::optional<int> die_after;
  std::optional<double> accuracy;
  double latency_ms = 1.0;
  app.add_option("--connect", connect, "HOST:PORT of the harness")->required();
  app.add_option("--epoch-ms", epoch_ms, "Simulated time per epoch");
  app.add_option("--die-after", die_after, "Disconnect after this many epochs of the first task");
  app.add_option("--accuracy", accuracy, "Constant accuracy instead of the hashed curve");
  app.add_option("--latency-ms", latency_ms, "Reported latency");
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    const auto [host, port] = canvas::harness::parse_endpoint(connect);
    canvas::harness::SimulatedWorkerConfig cfg;
    cfg.epoch_time = std::chrono::milliseconds(epoch_ms);
    cfg.die_after_epochs = die_after;
    cfg.latency_ms = latency_ms;
    if (accuracy) {
      const double a = *accuracy;
      cfg.curve = [a](const canvas::harness::Message& m) {
        return canvas::harness::AccuracyCurve(static_cast<std::size_t>(m.epochs.value_or(1)), a);
      };
    }
    canvas::harness::SimulatedWorker worker(canvas::harness::connect_tcp(host, port), cfg);
    worker.serve();
    std::cerr << "mock_worker: finished " << worker.tasks_finished() << " task(s)\n";
  } catch (const canvas::Error& e) {
    std::cerr << "mock_worker: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
