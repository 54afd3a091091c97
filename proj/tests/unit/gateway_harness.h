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
#include <stdexcept>
#include <string>

#include "mcpgw/config/config.h"
#include "mcpgw/gateway/runtime.h"
#include "mcpgw/testkit/mock_mcp_server.h"

namespace mcpgw::test {

/// Config text with "@UPSTREAM@" replaced by the mock server URL.
inline config::GatewayConfig config_from_yaml(std::string text, const std::string& upstream) {
  for (auto pos = text.find("@UPSTREAM@"); pos != std::string::npos;
       pos = text.find("@UPSTREAM@")) {
    text.replace(pos, 10, upstream);
  }
  auto loaded = config::load_config(text, [](std::string_view) { return std::nullopt; });
  if (auto* d = std::get_if<config::Diagnostics>(&loaded)) {
    std::string all;
    for (const auto& x : *d) all += config::format(x) + "\n";
    throw std::runtime_error("test config rejected:\n" + all);
  }
  return std::get<config::SnapshotPtr>(loaded)->config();
}

/// Ephemeral-port gateway in front of one mock server, health probing off.
struct GatewayUnderTest {
  explicit GatewayUnderTest(const std::string& yaml, const Clock* clock = nullptr,
                            testkit::MockScript script = {})
      : mock(std::move(script)) {
    mock.start();
    gateway::RuntimeOptions opts;
    if (clock) opts.clock = clock;
    opts.start_health_monitor = false;
    auto made = gateway::Runtime::create(config_from_yaml(yaml, mock.url()), opts);
    if (auto* d = std::get_if<config::Diagnostics>(&made)) {
      throw std::runtime_error("runtime rejected config: " + config::format(d->front()));
    }
    runtime = std::move(std::get<std::unique_ptr<gateway::Runtime>>(made));
    if (auto err = runtime->start()) throw std::runtime_error(*err);
  }

  int port() const { return runtime->port("web"); }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port());
    c.set_connection_timeout(std::chrono::seconds(5));
    c.set_read_timeout(std::chrono::seconds(10));
    return c;
  }

  /// Audit records of kind exchange, in order.
  std::vector<audit::AuditRecord> exchanges() const {
    std::vector<audit::AuditRecord> out;
    for (auto& r : runtime->audit().tail(100000)) {
      if (r.kind == audit::Kind::exchange) out.push_back(r);
    }
    return out;
  }

  testkit::MockMcpServer mock;
  std::unique_ptr<gateway::Runtime> runtime;
};

/// One protected SSE route shaped like the shipped example.
inline constexpr const char* kBasicYaml = R"(
entry_points:
  - name: web
    address: "127.0.0.1:0"
oauth:
  issuer_host: oauth.example.test
  public_scheme: https
routers:
  - id: helloworld-router
    host_rule: helloworld.example.test
    entry_points: [web]
    middleware_ids: [mcp-auth, redirect-wellknown, inspect]
    backend_id: helloworld-service
middlewares:
  - id: mcp-auth
    type: forward_auth
  - id: redirect-wellknown
    type: redirect_wellknown
  - id: inspect
    type: inspect
    inspect_responses: true
backends:
  - id: helloworld-service
    display_name: Hello World
    upstream_url: "@UPSTREAM@"
)";

}  // namespace mcpgw::test
