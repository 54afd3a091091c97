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
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mcpgw::testkit {

struct MockTool {
  std::string name;
  std::string description;
  nlohmann::json input_schema = {{"type", "object"}};
  /// Text returned by tools/call.
  std::string result_text;
};

/// Frames streamed verbatim on GET /events, then the stream ends.
struct EventPlan {
  std::vector<std::string> frames;
  std::chrono::milliseconds gap{0};
};

/// `count` frames carrying notifications/message with params.seq = 0..n-1.
/// A non-zero seed adds random printable padding to every frame.
EventPlan numbered_event_plan(int count, unsigned seed = 0);

/// The sequence numbers found in a run of frames, in order.
std::vector<int> sequence_numbers(const std::vector<std::string>& frames);

struct MockScript {
  /// Names must be unique.
  std::vector<MockTool> tools = {{"helloworld", "Returns a friendly greeting.",
                                  {{"type", "object"}}, "Hello, World!"}};
  std::optional<EventPlan> event_plan;
  /// One entry consumed per request; the last one sticks. true = up.
  std::vector<bool> availability_plan;
};

struct RecordedRequest {
  std::string method;
  std::string path;
  std::string query;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  bool has_header(std::string_view name) const;
  std::string header(std::string_view name) const;
};

/// An MCP server without authentication, speaking the SSE transport:
///   GET  /sse              stream; first event "endpoint" names the POST URL
///   POST /messages?session_id=...  202, the reply arrives on that stream
///   POST /mcp              direct JSON reply
///   GET  /events           the event plan
///   GET  /health           200
/// When the availability plan says down, every request gets 503.
class MockMcpServer {
 public:
  explicit MockMcpServer(MockScript script = {});
  ~MockMcpServer();
  MockMcpServer(const MockMcpServer&) = delete;
  MockMcpServer& operator=(const MockMcpServer&) = delete;

  /// Binds 127.0.0.1 on an ephemeral port (or `port`) and serves.
  void start(int port = 0);
  void stop();
  int port() const { return port_; }
  /// "http://127.0.0.1:<port>/"
  std::string url() const;

  void set_tools(std::vector<MockTool> tools);
  void set_event_plan(EventPlan plan);
  void set_availability_plan(std::vector<bool> plan);

  /// JSON-RPC handling shared by both transports. nullopt for
  /// notifications.
  std::optional<nlohmann::json> reply_to(const nlohmann::json& message);

  std::vector<RecordedRequest> requests() const;
  void clear_requests();
  int open_streams() const { return open_streams_.load(); }

 private:
  struct Session {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> outbox;
  };

  bool available();
  void record(const httplib::Request& req);
  std::shared_ptr<Session> find_session(const std::string& id);

  mutable std::mutex mu_;
  MockScript script_;
  std::size_t availability_index_ = 0;
  std::vector<RecordedRequest> requests_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<int> open_streams_{0};
};

}  // namespace mcpgw::testkit
