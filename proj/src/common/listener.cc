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

#include "mcpgw/common/listener.h"

namespace mcpgw {

bool ThreadPerConnection::enqueue(std::function<void()> fn) {
  {
    std::lock_guard lock(mu_);
    if (running_ >= max_) return false;
    ++running_;
  }
  std::thread([this, fn = std::move(fn)] {
    fn();
    std::lock_guard lock(mu_);
    --running_;
    cv_.notify_all();
  }).detach();
  return true;
}

void ThreadPerConnection::shutdown() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return running_ == 0; });
}

std::variant<std::unique_ptr<Listener>, std::string> Listener::bind(
    const std::string& host, int port, const std::optional<ListenerTls>& tls,
    RequestHandler handler) {
  std::unique_ptr<Listener> l(new Listener());
  if (tls) {
    l->server_ = std::make_unique<httplib::SSLServer>(tls->cert_file.c_str(),
                                                      tls->key_file.c_str());
    l->tls_ = true;
  } else {
    l->server_ = std::make_unique<httplib::Server>();
  }
  if (!l->server_->is_valid()) return std::string("cannot load TLS certificate or key");
  l->server_->new_task_queue = [] { return new ThreadPerConnection(); };
  auto h = std::make_shared<RequestHandler>(std::move(handler));
  auto route = [h](const httplib::Request& req, httplib::Response& res) { (*h)(req, res); };
  const std::string any = ".*";
  l->server_->Get(any, route);
  l->server_->Post(any, route);
  l->server_->Put(any, route);
  l->server_->Patch(any, route);
  l->server_->Delete(any, route);
  l->server_->Options(any, route);
  // Long-lived streams must not be cut by the default 5 s write timeout.
  l->server_->set_write_timeout(std::chrono::hours(1));
  l->server_->set_read_timeout(std::chrono::seconds(30));
  l->server_->set_payload_max_length(64u << 20);
  if (port == 0) {
    int p = l->server_->bind_to_any_port(host);
    if (p <= 0) return "cannot bind " + host + ":0";
    l->port_ = p;
  } else {
    if (!l->server_->bind_to_port(host, port)) {
      return "cannot bind " + host + ":" + std::to_string(port);
    }
    l->port_ = port;
  }
  return l;
}

Listener::~Listener() { stop(); }

void Listener::start() {
  if (thread_.joinable()) return;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Listener::stop() {
  if (stopped_.exchange(true)) return;
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::optional<HttpExchange> to_exchange(const httplib::Request& req, bool tls, MonoTime now) {
  HttpExchange ex;
  ex.method = req.method;
  auto host = normalize_host(req.get_header_value("Host"));
  if (!host || req.get_header_value_count("Host") != 1) return std::nullopt;
  ex.host = *host;
  auto path = normalize_path(req.path);
  if (!path) return std::nullopt;
  ex.path = *path;
  auto q = req.target.find('?');
  if (q != std::string::npos) ex.query = req.target.substr(q + 1);
  for (const auto& [name, value] : req.headers) {
    // httplib synthesizes these for its own bookkeeping.
    if (name == "REMOTE_ADDR" || name == "REMOTE_PORT" || name == "LOCAL_ADDR" ||
        name == "LOCAL_PORT") {
      continue;
    }
    ex.headers.add(name, value);
  }
  ex.body = req.body;
  ex.peer.ip = req.remote_addr;
  ex.peer.port = req.remote_port;
  ex.received_at = now;
  ex.tls = tls;
  return ex;
}

void write_response(const HttpResponse& in, httplib::Response& out) {
  out.status = in.status;
  std::string content_type = "text/plain; charset=utf-8";
  for (const auto& [name, value] : in.headers) {
    if (iequals(name, "Content-Type")) {
      content_type = value;
    } else if (!iequals(name, "Content-Length")) {
      out.headers.emplace(name, value);
    }
  }
  out.set_content(in.body, content_type);
}

}  // namespace mcpgw
