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

#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/config/config.h"
#include "mcpgw/config/connector.h"
#include "mcpgw/config/registry.h"
#include "mcpgw/gateway/middlewares.h"
#include "mcpgw/oauth/auth_server.h"
#include "mcpgw/policy/connection_limiter.h"

namespace mcpgw::gateway {

/// Public listeners answer 404 under this prefix, whatever the route table
/// says; the admin API has its own listener.
inline constexpr std::string_view kAdminPrefix = "/admin";

struct GatewayDeps {
  const Clock* clock = &SystemClock::instance();
  audit::AuditSink* audit = nullptr;
  config::Registry* registry = nullptr;
  /// Serves the issuer host. Null answers 404 there.
  oauth::AuthorizationServer* auth_server = nullptr;
  const config::UpstreamConnector* connector = nullptr;
  policy::ConnectionLimiter* sse_limiter = nullptr;
  MiddlewareServices services;
};

/// Where a request came in.
struct ListenerContext {
  std::string entry_point;
  bool tls = false;
};

/// The public request path: route, run the chain, then proxy. Every
/// exchange produces exactly one audit record of kind exchange.
class Gateway {
 public:
  explicit Gateway(GatewayDeps deps);

  void serve(const httplib::Request& req, httplib::Response& res, const ListenerContext& where);

  /// Middleware instances for the live snapshot, rebuilt after a swap.
  std::shared_ptr<const Pipeline> pipeline_for(const config::SnapshotPtr& snapshot);

 private:
  void finish(httplib::Response& res, const HttpResponse& out, audit::Summary summary);
  void proxy(const HttpExchange& ex, const config::SnapshotPtr& snap, const RouteConfig& route,
             std::shared_ptr<const Pipeline> pipeline, ExchangeContext& ctx,
             const std::vector<Middleware*>& chain, Continue mutations, httplib::Response& res,
             audit::Summary summary);
  void audit_exchange(const audit::Summary& summary);

  GatewayDeps deps_;
  std::mutex pipeline_mu_;
  config::SnapshotPtr pipeline_snapshot_;
  std::shared_ptr<const Pipeline> pipeline_;
};

}  // namespace mcpgw::gateway
