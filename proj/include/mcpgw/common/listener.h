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

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "mcpgw/common/http.h"

namespace mcpgw {

/// Runs every connection on its own thread, so a long-lived stream never
/// holds up accepting or serving others. Bounded by `max_connections`;
/// beyond it new connections are refused.
class ThreadPerConnection final : public httplib::TaskQueue {
 public:
  explicit ThreadPerConnection(std::size_t max_connections = 1024)
      : max_(max_connections) {}
  ~ThreadPerConnection() override { shutdown(); }

  bool enqueue(std::function<void()> fn) override;
  /// Waits for every running connection to finish.
  void shutdown() override;

 private:
  std::size_t max_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t running_ = 0;
};

struct ListenerTls {
  std::string cert_file;
  std::string key_file;
};

using RequestHandler = std::function<void(const httplib::Request&, httplib::Response&)>;

/// One bound HTTP(S) server. Every method and path goes to `handler`.
class Listener {
 public:
  /// Binds immediately so that port() is known before start(). Port 0
  /// picks an ephemeral port.
  static std::variant<std::unique_ptr<Listener>, std::string> bind(
      const std::string& host, int port, const std::optional<ListenerTls>& tls,
      RequestHandler handler);

  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  int port() const { return port_; }
  bool tls() const { return tls_; }
  void start();
  /// Closes the socket and joins every connection thread.
  void stop();

 private:
  Listener() = default;

  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  bool tls_ = false;
  std::thread thread_;
  std::atomic<bool> stopped_{false};
};

/// httplib request to the internal exchange. nullopt when the Host header
/// or path cannot be normalized.
std::optional<HttpExchange> to_exchange(const httplib::Request& req, bool tls, MonoTime now);

/// Copies a Response onto an httplib response.
void write_response(const HttpResponse& in, httplib::Response& out);

}  // namespace mcpgw
