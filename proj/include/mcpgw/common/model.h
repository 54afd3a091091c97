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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcpgw/common/clock.h"

namespace mcpgw {

/// Binds a host (and optional path prefix) to a backend plus an ordered
/// middleware chain.
struct RouteConfig {
  std::string id;
  std::string host_rule;
  std::string path_prefix = "/";
  /// Empty = served on every entry point.
  std::vector<std::string> entry_points;
  std::vector<std::string> middleware_ids;
  std::string backend_id;
  bool tls_required = false;
  /// Bumped on every middleware edit; used for optimistic concurrency.
  std::uint64_t version = 1;

  bool operator==(const RouteConfig&) const = default;
};

struct BackendServer {
  std::string id;
  std::string display_name;
  std::string upstream_url;
  std::string transport = "sse";
  std::optional<std::int64_t> onboarded_at_ms;

  bool operator==(const BackendServer&) const = default;
};

enum class HealthState { unknown, healthy, unhealthy };

struct BackendHealth {
  HealthState state = HealthState::unknown;
  std::optional<WallTime> since;
  std::optional<WallTime> last_probe;
};

const char* to_string(HealthState s);

/// What a validated bearer token says about the caller.
struct Claims {
  std::string subject;
  std::string scope;
  std::string client_id;
};

}  // namespace mcpgw
