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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/listener.h"
#include "mcpgw/config/config.h"
#include "mcpgw/config/connector.h"
#include "mcpgw/config/health.h"
#include "mcpgw/config/registry.h"
#include "mcpgw/gateway/gateway.h"
#include "mcpgw/inspect/rules.h"
#include "mcpgw/oauth/auth_server.h"
#include "mcpgw/oauth/forward_auth.h"
#include "mcpgw/policy/ban_store.h"
#include "mcpgw/policy/connection_limiter.h"
#include "mcpgw/policy/rate_limiter.h"

namespace mcpgw::gateway {

struct RuntimeOptions {
  const Clock* clock = &SystemClock::instance();
  bool start_health_monitor = true;
  /// Defaults to an HTTP GET through the connector.
  std::optional<config::Prober> prober;
  /// Defaults to DirectConnector. Must outlive the runtime.
  const config::UpstreamConnector* connector = nullptr;
};

/// Everything behind the public listeners, wired from one config:
/// audit log, ban store, registry, authorization server, middleware
/// services, health monitor and one listener per entry point. State files
/// live under state_dir (audit.log, bans.json, oauth/, onboarded/,
/// route_overrides/); an empty state_dir keeps everything in memory.
class Runtime {
 public:
  static std::variant<std::unique_ptr<Runtime>, config::Diagnostics> create(
      config::GatewayConfig config, RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Binds and serves every entry point. An error leaves nothing bound.
  std::optional<std::string> start();
  void stop();

  /// Bound port of an entry point; 0 before start().
  int port(std::string_view entry_point) const;

  const Clock& clock() const { return *options_.clock; }
  audit::AuditLog& audit() { return *audit_; }
  config::Registry& registry() { return *registry_; }
  policy::BanStore& bans() { return *bans_; }
  policy::RateLimiter& rate_limiter() { return rate_limiter_; }
  inspect::DetectionLog& detections() { return *detections_; }
  oauth::AuthorizationServer& auth_server() { return *auth_server_; }
  config::HealthMonitor& health() { return *health_; }
  Gateway& gateway() { return *gateway_; }
  const config::UpstreamConnector& connector() const { return *options_.connector; }

 private:
  explicit Runtime(RuntimeOptions options) : options_(std::move(options)) {}

  RuntimeOptions options_;
  config::DirectConnector direct_;
  std::unique_ptr<audit::AuditLog> audit_;
  std::unique_ptr<policy::BanStore> bans_;
  std::unique_ptr<config::Registry> registry_;
  std::unique_ptr<oauth::AuthorizationServer> auth_server_;
  std::unique_ptr<oauth::LocalForwardAuth> forward_auth_;
  std::unique_ptr<inspect::DetectionLog> detections_;
  policy::RateLimiter rate_limiter_;
  std::unique_ptr<policy::ConnectionLimiter> sse_limiter_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<config::HealthMonitor> health_;
  std::map<std::string, std::unique_ptr<Listener>, std::less<>> listeners_;
};

}  // namespace mcpgw::gateway
