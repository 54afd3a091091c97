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

#include "mcpgw/config/health.h"

#include <httplib.h>

#include "mcpgw/common/http.h"

namespace mcpgw::config {

Prober http_prober(const UpstreamConnector& connector, std::chrono::milliseconds timeout) {
  return [&connector, timeout](const BackendServer& b) {
    auto client = connector.open(b, UpstreamTimeouts{timeout, timeout});
    if (!client) return false;
    auto url = parse_url(b.upstream_url);
    std::string path = url ? url->path : "/";
    if (url && !url->query.empty()) path += "?" + url->query;
    // Stops reading at the headers: SSE endpoints never finish their body.
    int status = 0;
    auto res = client->Get(
        path, httplib::Headers{{"Accept", "text/event-stream, application/json, */*"}},
        [&](const httplib::Response& r) {
          status = r.status;
          return false;
        },
        [](const char*, std::size_t) { return false; });
    if (status == 0 && res) status = res->status;
    return status > 0 && status < 500;
  };
}

HealthMonitor::HealthMonitor(Registry& registry, Prober prober, const Clock& clock,
                             audit::AuditSink* audit, std::chrono::milliseconds interval)
    : registry_(registry),
      prober_(std::move(prober)),
      clock_(clock),
      audit_(audit),
      interval_(interval) {}

HealthMonitor::~HealthMonitor() { stop(); }

void HealthMonitor::probe(const BackendServer& backend) {
  bool up = prober_(backend);
  auto now = clock_.wall_now();
  auto prev = registry_.health().get(backend.id);
  BackendHealth next = prev;
  next.last_probe = now;
  auto state = up ? HealthState::healthy : HealthState::unhealthy;
  if (prev.state != state) {
    next.state = state;
    next.since = now;
  }
  registry_.health().set(backend.id, next);
  if (prev.state != state && audit_) {
    audit_->append(audit::Kind::health_change, {{"backend", backend.id},
                                                {"from", to_string(prev.state)},
                                                {"to", to_string(state)}});
  }
}

void HealthMonitor::tick() {
  auto snap = registry_.current();
  for (const auto& b : snap->config().backends) probe(b);
}

void HealthMonitor::start() {
  std::lock_guard lock(mu_);
  if (thread_.joinable()) return;
  stopping_ = false;
  thread_ = std::thread([this] {
    std::unique_lock lock(mu_);
    while (!stopping_) {
      lock.unlock();
      tick();
      lock.lock();
      cv_.wait_for(lock, interval_, [this] { return stopping_; });
    }
  });
}

void HealthMonitor::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mcpgw::config
