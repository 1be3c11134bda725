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

// Newline-delimited records over a stream socket.

#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace canvas::harness {

class LineChannel {
 public:
  // Takes ownership of `fd`.
  explicit LineChannel(int fd);
  ~LineChannel();

  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  enum class ReadStatus { kLine, kTimeout, kClosed };

  // Blocks up to `timeout` (forever when unset). Reading is single-threaded.
  ReadStatus read_line(std::string& out,
                       std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  // Thread-safe. Returns false once the peer is gone.
  bool write_line(std::string_view line);

  // Wakes blocked readers on both ends; the fd stays open until destruction.
  void shutdown();

  // Closes the fd immediately, as a crashed process would.
  void abort();

 private:
  int fd_;
  std::string buffer_;
  std::mutex write_mu_;
};

// Connected AF_UNIX stream pair.
std::pair<int, int> socket_pair();

// Returns the listening fd and the bound port (port 0 picks a free one).
std::pair<int, int> listen_tcp(const std::string& host, int port);

// Throws Error(kIo) when the connection fails.
int connect_tcp(const std::string& host, int port);

// "host:port"
std::pair<std::string, int> parse_endpoint(std::string_view text);

}  // namespace canvas::harness
