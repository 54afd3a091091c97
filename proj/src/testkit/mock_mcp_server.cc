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

#include "mcpgw/testkit/mock_mcp_server.h"

#include <random>
#include <sstream>
#include <stdexcept>

#include "mcpgw/common/http.h"
#include "mcpgw/common/listener.h"

namespace mcpgw::testkit {

using nlohmann::json;

EventPlan numbered_event_plan(int count, unsigned seed) {
  EventPlan plan;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> len(0, seed ? 200 : 0);
  std::uniform_int_distribution<int> ch(0x20, 0x7e);
  for (int i = 0; i < count; ++i) {
    std::string pad;
    int n = len(rng);
    for (int k = 0; k < n; ++k) pad.push_back(static_cast<char>(ch(rng)));
    json msg = {{"jsonrpc", "2.0"},
                {"method", "notifications/message"},
                {"params", {{"level", "info"}, {"seq", i}, {"data", pad}}}};
    plan.frames.push_back("id: " + std::to_string(i) + "\nevent: message\ndata: " + msg.dump() +
                          "\n\n");
  }
  return plan;
}

std::vector<int> sequence_numbers(const std::vector<std::string>& frames) {
  std::vector<int> out;
  for (const auto& f : frames) {
    std::istringstream in(f);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.starts_with("data:")) continue;
      auto j = json::parse(line.substr(line.starts_with("data: ") ? 6 : 5), nullptr, false);
      if (j.is_object() && j.contains("params") && j["params"].contains("seq")) {
        out.push_back(j["params"]["seq"].get<int>());
      }
    }
  }
  return out;
}

bool RecordedRequest::has_header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return true;
  }
  return false;
}

std::string RecordedRequest::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return v;
  }
  return {};
}

MockMcpServer::MockMcpServer(MockScript script) : script_(std::move(script)) {}

MockMcpServer::~MockMcpServer() { stop(); }

std::string MockMcpServer::url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/"; }

void MockMcpServer::set_tools(std::vector<MockTool> tools) {
  std::lock_guard lock(mu_);
  script_.tools = std::move(tools);
}

void MockMcpServer::set_event_plan(EventPlan plan) {
  std::lock_guard lock(mu_);
  script_.event_plan = std::move(plan);
}

void MockMcpServer::set_availability_plan(std::vector<bool> plan) {
  std::lock_guard lock(mu_);
  script_.availability_plan = std::move(plan);
  availability_index_ = 0;
}

bool MockMcpServer::available() {
  std::lock_guard lock(mu_);
  const auto& plan = script_.availability_plan;
  if (plan.empty()) return true;
  bool up = plan[std::min(availability_index_, plan.size() - 1)];
  ++availability_index_;
  return up;
}

void MockMcpServer::record(const httplib::Request& req) {
  RecordedRequest r;
  r.method = req.method;
  r.path = req.path;
  auto q = req.target.find('?');
  if (q != std::string::npos) r.query = req.target.substr(q + 1);
  for (const auto& [k, v] : req.headers) {
    if (k == "REMOTE_ADDR" || k == "REMOTE_PORT" || k == "LOCAL_ADDR" || k == "LOCAL_PORT") {
      continue;
    }
    r.headers.emplace_back(k, v);
  }
  r.body = req.body;
  std::lock_guard lock(mu_);
  requests_.push_back(std::move(r));
}

std::vector<RecordedRequest> MockMcpServer::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

void MockMcpServer::clear_requests() {
  std::lock_guard lock(mu_);
  requests_.clear();
}

std::shared_ptr<MockMcpServer::Session> MockMcpServer::find_session(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::optional<json> MockMcpServer::reply_to(const json& msg) {
  if (!msg.is_object() || !msg.contains("id")) return std::nullopt;
  auto result = [&](json r) { return json{{"jsonrpc", "2.0"}, {"id", msg["id"]}, {"result", r}}; };
  auto error = [&](int code, std::string message) {
    return json{{"jsonrpc", "2.0"},
                {"id", msg["id"]},
                {"error", {{"code", code}, {"message", std::move(message)}}}};
  };
  std::string method = msg.value("method", "");
  std::lock_guard lock(mu_);
  if (method == "initialize") {
    return result({{"protocolVersion", "2024-11-05"},
                   {"capabilities", {{"tools", json::object()}}},
                   {"serverInfo", {{"name", "mock-mcp"}, {"version", "1.0.0"}}}});
  }
  if (method == "ping") return result(json::object());
  if (method == "tools/list") {
    json tools = json::array();
    for (const auto& t : script_.tools) {
      tools.push_back(
          {{"name", t.name}, {"description", t.description}, {"inputSchema", t.input_schema}});
    }
    return result({{"tools", tools}});
  }
  if (method == "tools/call") {
    std::string name;
    if (msg.contains("params") && msg["params"].is_object()) {
      name = msg["params"].value("name", "");
    }
    for (const auto& t : script_.tools) {
      if (t.name == name) {
        return result(
            {{"content", json::array({{{"type", "text"}, {"text", t.result_text}}})},
             {"isError", false}});
      }
    }
    return error(-32602, "unknown tool: " + name);
  }
  return error(-32601, "method not found: " + method);
}

void MockMcpServer::start(int port) {
  if (server_) throw std::logic_error("mock server already started");
  server_ = std::make_unique<httplib::Server>();
  server_->new_task_queue = [] { return new ThreadPerConnection(); };
  server_->set_write_timeout(std::chrono::seconds(30));
  auto& srv = *server_;

  srv.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    record(req);
    if (available()) return httplib::Server::HandlerResponse::Unhandled;
    res.status = 503;
    res.set_content("unavailable", "text/plain");
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  srv.Get("/sse", [this](const httplib::Request&, httplib::Response& res) {
    auto session = std::make_shared<Session>();
    std::string id;
    {
      std::lock_guard lock(mu_);
      id = "s" + std::to_string(next_session_++);
      sessions_[id] = session;
    }
    session->outbox.push_back("event: endpoint\ndata: /messages?session_id=" + id + "\n\n");
    ++open_streams_;
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, session](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(session->mu);
          session->cv.wait_for(lock, std::chrono::milliseconds(100),
                               [&] { return !session->outbox.empty() || stopping_.load(); });
          if (stopping_) {
            sink.done();
            return true;
          }
          while (!session->outbox.empty()) {
            auto frame = std::move(session->outbox.front());
            session->outbox.pop_front();
            if (!sink.write(frame.data(), frame.size())) return false;
          }
          return sink.is_writable();
        },
        [this, id](bool) {
          --open_streams_;
          std::lock_guard lock(mu_);
          sessions_.erase(id);
        });
  });

  srv.Post("/messages", [this](const httplib::Request& req, httplib::Response& res) {
    auto msg = json::parse(req.body, nullptr, false);
    if (msg.is_discarded()) {
      res.status = 400;
      res.set_content("invalid json", "text/plain");
      return;
    }
    auto sid = req.get_param_value("session_id");
    if (sid.empty()) {
      auto reply = reply_to(msg);
      if (!reply) {
        res.status = 202;
        return;
      }
      res.set_content(reply->dump(), "application/json");
      return;
    }
    auto session = find_session(sid);
    if (!session) {
      res.status = 404;
      res.set_content("unknown session", "text/plain");
      return;
    }
    if (auto reply = reply_to(msg)) {
      std::lock_guard lock(session->mu);
      session->outbox.push_back("event: message\ndata: " + reply->dump() + "\n\n");
      session->cv.notify_all();
    }
    res.status = 202;
    res.set_content("Accepted", "text/plain");
  });

  srv.Post("/mcp", [this](const httplib::Request& req, httplib::Response& res) {
    auto msg = json::parse(req.body, nullptr, false);
    if (msg.is_discarded()) {
      res.status = 400;
      res.set_content("invalid json", "text/plain");
      return;
    }
    auto reply = reply_to(msg);
    if (!reply) {
      res.status = 202;
      return;
    }
    res.set_content(reply->dump(), "application/json");
  });

  srv.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    EventPlan plan;
    {
      std::lock_guard lock(mu_);
      if (script_.event_plan) plan = *script_.event_plan;
    }
    auto frames = std::make_shared<EventPlan>(std::move(plan));
    auto next = std::make_shared<std::size_t>(0);
    ++open_streams_;
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, frames, next](std::size_t, httplib::DataSink& sink) {
          if (*next >= frames->frames.size() || stopping_) {
            sink.done();
            return true;
          }
          if (*next > 0 && frames->gap.count() > 0) std::this_thread::sleep_for(frames->gap);
          const auto& f = frames->frames[(*next)++];
          return sink.write(f.data(), f.size());
        },
        [this](bool) { --open_streams_; });
  });

  if (port == 0) {
    port_ = srv.bind_to_any_port("127.0.0.1");
  } else if (srv.bind_to_port("127.0.0.1", port)) {
    port_ = port;
  }
  if (port_ <= 0) throw std::runtime_error("mock server cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockMcpServer::stop() {
  if (!server_ || stopping_.exchange(true)) return;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) s->cv.notify_all();
  }
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mcpgw::testkit
