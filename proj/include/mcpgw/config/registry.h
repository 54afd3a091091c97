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

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/config/config.h"

namespace mcpgw::config {

struct OnboardDescriptor {
  std::string display_name;
  std::string upstream_url;
  std::string host_rule;
  std::vector<std::string> middleware_ids;
  std::string path_prefix = "/";
  std::vector<std::string> entry_points;
  /// Optional; derived from display_name when empty.
  std::string id;
};

std::optional<OnboardDescriptor> descriptor_from_json(const nlohmann::json& j, Diagnostics& diags);

struct OnboardResult {
  BackendServer backend;
  RouteConfig route;
};

struct RegistryError {
  enum class Kind { invalid, not_found, conflict, io };
  Kind kind = Kind::invalid;
  Diagnostics diagnostics;
};

/// Health is mutable and lives beside the immutable snapshots.
class HealthTable {
 public:
  BackendHealth get(std::string_view backend_id) const;
  /// Returns the previous value.
  BackendHealth set(const std::string& backend_id, BackendHealth h);
  std::map<std::string, BackendHealth> all() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, BackendHealth, std::less<>> table_;
};

/// Owns the live snapshot. Writers are serialized; readers take a
/// shared_ptr copy and keep it for the whole exchange.
class Registry {
 public:
  /// Merges the overlay under <state_dir>/onboarded and
  /// <state_dir>/route_overrides over `base`. Fails closed if the merged
  /// config does not validate.
  static std::variant<std::unique_ptr<Registry>, Diagnostics> open(SnapshotPtr base,
                                                                   const Clock& clock,
                                                                   audit::AuditSink* audit);

  SnapshotPtr current() const;

  /// Persists, swaps, then audits one config_change.
  std::variant<OnboardResult, RegistryError> onboard(const OnboardDescriptor& d,
                                                     std::string_view actor);

  /// Optimistic concurrency: `expected_version`, when given, must equal the
  /// route's current version.
  std::variant<RouteConfig, RegistryError> set_route_middlewares(
      std::string_view route_id, const std::vector<std::string>& middleware_ids,
      std::optional<std::uint64_t> expected_version, std::string_view actor);

  HealthTable& health() { return health_; }
  const HealthTable& health() const { return health_; }

 private:
  Registry(SnapshotPtr snap, const Clock& clock, audit::AuditSink* audit);

  void publish(SnapshotPtr next);
  std::filesystem::path state_dir() const;

  const Clock& clock_;
  audit::AuditSink* audit_;
  mutable std::mutex snap_mu_;
  SnapshotPtr snap_;
  std::mutex write_mu_;
  HealthTable health_;
};

/// Lowercase alphanumerics and '-', no leading '-'; used for onboarded ids
/// because they become file names.
bool is_safe_id(std::string_view id);
std::string slugify(std::string_view display_name);

}  // namespace mcpgw::config
