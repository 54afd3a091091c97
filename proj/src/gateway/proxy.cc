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

#include "mcpgw/gateway/proxy.h"

#include <cstdio>

#include "mcpgw/oauth/forward_auth.h"

namespace mcpgw::gateway {

std::string encode_path(std::string_view p) {
  static constexpr std::string_view kKeep = "/-._~!$&'()*+,;=:@";
  std::string out;
  out.reserve(p.size());
  for (unsigned char c : p) {
    if (std::isalnum(c) || kKeep.find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out.append(buf);
    }
  }
  return out;
}

namespace {

std::vector<std::string> connection_tokens(const Headers& h) {
  std::vector<std::string> out;
  for (const auto& v : h.get_all("Connection")) {
    std::size_t pos = 0;
    while (pos <= v.size()) {
      auto comma = v.find(',', pos);
      if (comma == std::string::npos) comma = v.size();
      auto tok = v.substr(pos, comma - pos);
      auto b = tok.find_first_not_of(" \t");
      auto e = tok.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(tok.substr(b, e - b + 1));
      pos = comma + 1;
    }
  }
  return out;
}

}  // namespace

Headers without_hop_by_hop(const Headers& in) {
  auto listed = connection_tokens(in);
  Headers out;
  for (const auto& [name, value] : in) {
    if (is_hop_by_hop(name)) continue;
    bool named = false;
    for (const auto& t : listed) named = named || iequals(t, name);
    if (!named) out.add(name, value);
  }
  return out;
}

UpstreamRequest build_upstream_request(
    const HttpExchange& req, std::string_view base_path,
    const std::vector<std::pair<std::string, std::string>>& mutations) {
  UpstreamRequest up;
  up.method = req.method;
  std::string path = std::string(base_path) + req.path;
  up.target = encode_path(path);
  if (!req.query.empty()) up.target += "?" + req.query;
  up.headers = without_hop_by_hop(req.headers);
  for (auto name : {"Host", "Content-Length", "Authorization", "Proxy-Authorization"}) {
    up.headers.remove(name);
  }
  up.headers.remove(oauth::kForwardedUserHeader);
  std::string xff = req.peer.ip;
  if (auto prior = up.headers.get("X-Forwarded-For")) xff = *prior + ", " + req.peer.ip;
  up.headers.set("X-Forwarded-For", xff);
  up.headers.set("X-Forwarded-Host", req.host);
  up.headers.set("X-Forwarded-Proto", req.tls ? "https" : "http");
  for (const auto& [name, value] : mutations) up.headers.set(name, value);
  up.body = req.body;
  return up;
}

Headers client_response_headers(const httplib::Headers& upstream) {
  Headers h;
  for (const auto& [name, value] : upstream) h.add(name, value);
  h = without_hop_by_hop(h);
  h.remove("Content-Length");
  h.remove("Content-Type");
  return h;
}

std::shared_ptr<UpstreamCall> UpstreamCall::start(std::unique_ptr<httplib::Client> client,
                                                  UpstreamRequest req,
                                                  std::size_t max_buffered) {
  std::shared_ptr<UpstreamCall> call(new UpstreamCall());
  call->client_ = std::move(client);
  call->client_->set_url_encode(false);
  call->max_buffered_ = max_buffered;
  call->worker_ = std::thread([c = call.get(), r = std::move(req)]() mutable { c->run(std::move(r)); });
  return call;
}

UpstreamCall::~UpstreamCall() { cancel(); }

void UpstreamCall::run(UpstreamRequest up) {
  httplib::Request req;
  req.method = up.method;
  req.path = up.target;
  for (const auto& [name, value] : up.headers) req.headers.emplace(name, value);
  req.body = std::move(up.body);
  if (!req.body.empty() && !req.has_header("Content-Type")) {
    req.headers.emplace("Content-Type", "application/octet-stream");
  }
  req.response_handler = [this](const httplib::Response& r) {
    std::lock_guard lock(mu_);
    status_ = r.status;
    headers_ = r.headers;
    headers_ready_ = true;
    cv_.notify_all();
    return !cancelled_;
  };
  req.content_receiver = [this](const char* data, std::size_t n, uint64_t, uint64_t) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return cancelled_ || buffer_.size() < max_buffered_; });
    if (cancelled_) return false;
    buffer_.append(data, n);
    cv_.notify_all();
    return true;
  };
  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  client_->send(req, res, err);
  std::lock_guard lock(mu_);
  error_ = err;
  done_ = true;
  cv_.notify_all();
}

bool UpstreamCall::wait_headers() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return headers_ready_ || done_; });
  return headers_ready_;
}

UpstreamCall::Pull UpstreamCall::pull(std::string& out, std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return !buffer_.empty() || done_ || cancelled_; });
  if (!buffer_.empty()) {
    out.append(buffer_);
    buffer_.clear();
    cv_.notify_all();
    return Pull::data;
  }
  if (done_ || cancelled_) return Pull::end;
  return Pull::timeout;
}

void UpstreamCall::cancel() {
  std::call_once(cancel_once_, [this] {
    {
      std::lock_guard lock(mu_);
      cancelled_ = true;
      cv_.notify_all();
    }
    // stop() only affects a socket that is already open; repeat until the
    // worker has left send().
    while (true) {
      client_->stop();
      std::unique_lock lock(mu_);
      if (cv_.wait_for(lock, std::chrono::milliseconds(50), [&] { return done_; })) break;
    }
    if (worker_.joinable()) worker_.join();
  });
}

}  // namespace mcpgw::gateway
