// Copyright 2026 The MCP Gateway Authors
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

#pragma once

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mcpgw::testkit {

struct SseFrame {
  /// Exact bytes, including the terminating blank line.
  std::string raw;
  std::string event = "message";
  std::string data;
};

/// Client side of one event stream, read on a background thread. Frames
/// are split on LF LF only, which is all the testkit and gateway emit.
class SseReader {
 public:
  /// Connects to host:port and sends GET `target` with `headers`; returns
  /// once the response headers arrived or the attempt failed.
  static std::unique_ptr<SseReader> open(const std::string& host, int port, std::string target,
                                         httplib::Headers headers,
                                         std::chrono::milliseconds timeout = std::chrono::seconds(5));
  ~SseReader();
  SseReader(const SseReader&) = delete;
  SseReader& operator=(const SseReader&) = delete;

  /// 0 when no response arrived.
  int status() const { return status_; }
  std::string header(const std::string& name) const;

  /// Next complete frame, or nullopt after `timeout` or once the stream has
  /// ended with nothing left.
  std::optional<SseFrame> next(std::chrono::milliseconds timeout = std::chrono::seconds(5));
  /// Every byte received so far.
  std::string raw() const;
  bool ended() const;
  void close();

 private:
  SseReader() = default;

  std::unique_ptr<httplib::Client> client_;
  std::thread worker_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool headers_ready_ = false;
  bool ended_ = false;
  bool closing_ = false;
  int status_ = 0;
  httplib::Headers headers_;
  std::string raw_;
  std::string pending_;
  std::deque<SseFrame> frames_;
};

}  // namespace mcpgw::testkit
