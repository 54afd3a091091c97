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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcpgw/common/model.h"
#include "mcpgw/inspect/rules.h"
#include "mcpgw/policy/rate_limiter.h"

namespace mcpgw::config {

/// "path.to[3].field" plus a human message.
struct Diagnostic {
  std::string path;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string format(const Diagnostic& d);

struct ListenAddress {
  std::string host;
  int port = 0;  // 0 = ephemeral, for tests
};

/// "host:port" or "[v6]:port".
std::optional<ListenAddress> parse_listen_address(std::string_view s);

struct TlsSettings {
  std::string cert_file;
  std::string key_file;

  bool operator==(const TlsSettings&) const = default;
};

struct EntryPoint {
  std::string name;
  std::string address;
  std::optional<TlsSettings> tls;

  bool operator==(const EntryPoint&) const = default;
};

enum class Permission { read, write };

struct AdminKey {
  std::string name;
  /// crypto::hash_api_key output; never the key itself.
  std::string key_hash;
  Permission permission = Permission::read;

  bool operator==(const AdminKey&) const = default;
};

struct AdminSettings {
  std::string address;  // empty disables the admin listener
  std::vector<AdminKey> keys;
  std::string ui_dir;   // optional static files served under /admin/ui

  bool operator==(const AdminSettings&) const = default;
};

struct OAuthConfig {
  std::string issuer_host;
  std::string public_scheme = "https";
  int public_port = 0;
  std::vector<std::string> stub_idp_users = {"alice"};
  /// Chain applied in front of the authorization server's own endpoints.
  std::vector<std::string> middleware_ids;

  bool operator==(const OAuthConfig&) const = default;
};

struct AuditSettings {
  std::string path;  // empty keeps the log in memory only
  std::uint64_t max_segment_bytes = 64u << 20;

  bool operator==(const AuditSettings&) const = default;
};

struct Limits {
  int max_sse_per_peer = 16;
  std::size_t max_body_bytes = inspect::kMaxMessageBytes;
  int upstream_connect_timeout_ms = 2000;
  int upstream_read_timeout_ms = 3600 * 1000;
  int operator_ban_ttl_s = 24 * 3600;

  bool operator==(const Limits&) const = default;
};

/// Delegates to the in-process authorization server when address is empty,
/// otherwise to a remote /forward-auth endpoint.
struct ForwardAuthSpec {
  std::string address;
  std::vector<std::string> auth_response_headers = {"X-Forwarded-User"};

  bool operator==(const ForwardAuthSpec&) const = default;
};

struct RedirectWellknownSpec {
  std::string oauth_host;  // empty = oauth.issuer_host
  bool permanent = true;

  bool operator==(const RedirectWellknownSpec&) const = default;
};

struct RateLimitMiddlewareSpec {
  policy::RateLimitSpec limit;

  bool operator==(const RateLimitMiddlewareSpec&) const = default;
};

struct BanCheckSpec {
  bool operator==(const BanCheckSpec&) const = default;
};

/// Empty rule list = every rule in the set. Responses are inspected only
/// when asked for.
struct InspectSpec {
  std::vector<std::string> rules;
  bool inspect_responses = false;

  bool operator==(const InspectSpec&) const = default;
};

using MiddlewareKind = std::variant<ForwardAuthSpec, RedirectWellknownSpec,
                                    RateLimitMiddlewareSpec, BanCheckSpec, InspectSpec>;

struct MiddlewareSpec {
  std::string id;
  MiddlewareKind kind;

  bool operator==(const MiddlewareSpec&) const = default;
};

const char* type_name(const MiddlewareKind& k);

struct GatewayConfig {
  std::vector<EntryPoint> entry_points;
  AdminSettings admin;
  OAuthConfig oauth;
  std::string state_dir;
  AuditSettings audit;
  Limits limits;
  std::vector<RouteConfig> routers;
  std::vector<MiddlewareSpec> middlewares;
  std::vector<inspect::ThreatRuleSpec> rules;
  std::vector<BackendServer> backends;

  bool operator==(const GatewayConfig&) const = default;
};

/// Validated, immutable view handed to request handlers. Replaced as a
/// whole on every change.
class ConfigSnapshot {
 public:
  /// Semantic validation plus rule compilation. Never returns a partial
  /// snapshot.
  static std::variant<std::shared_ptr<const ConfigSnapshot>, Diagnostics> build(
      GatewayConfig config, std::uint64_t generation = 0);

  const GatewayConfig& config() const { return config_; }
  const inspect::RuleSet& rules() const { return rules_; }
  std::uint64_t generation() const { return generation_; }

  const RouteConfig* find_route(std::string_view id) const;
  const BackendServer* find_backend(std::string_view id) const;
  const MiddlewareSpec* find_middleware(std::string_view id) const;
  const EntryPoint* find_entry_point(std::string_view name) const;
  bool is_route_host(std::string_view host) const;

 private:
  ConfigSnapshot(GatewayConfig c, inspect::RuleSet r, std::uint64_t g)
      : config_(std::move(c)), rules_(std::move(r)), generation_(g) {}

  GatewayConfig config_;
  inspect::RuleSet rules_;
  std::uint64_t generation_;
};

using SnapshotPtr = std::shared_ptr<const ConfigSnapshot>;

/// Cross-reference and uniqueness checks; empty when the config is sound.
Diagnostics validate(const GatewayConfig& config);

/// Document to structure. Unknown fields and wrong types are diagnostics.
std::variant<GatewayConfig, Diagnostics> parse_config(std::string_view yaml_text);

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;
EnvLookup process_env();

/// MCPGW_ISSUER_HOST, MCPGW_ADMIN_ADDRESS and MCPGW_ENTRYPOINT_<NAME>_ADDRESS
/// (name uppercased, '-' as '_').
void apply_env_overrides(GatewayConfig& config, const EnvLookup& env);

/// parse + env overrides + build. Total: a snapshot or diagnostics.
std::variant<SnapshotPtr, Diagnostics> load_config(std::string_view yaml_text,
                                                   const EnvLookup& env = {});

/// Like load_config, with relative paths (state_dir, audit.path, TLS files,
/// admin.ui_dir) resolved against the file's directory. A missing file is a
/// diagnostic at path "".
std::variant<SnapshotPtr, Diagnostics> load_config_file(const std::filesystem::path& path,
                                                        const EnvLookup& env = {});

/// JSON is a YAML subset, so the output reloads through load_config.
nlohmann::json to_json(const GatewayConfig& c);
std::string serialize(const GatewayConfig& c);

nlohmann::json to_json(const RouteConfig& r);
nlohmann::json to_json(const BackendServer& b);
nlohmann::json to_json(const MiddlewareSpec& m);
nlohmann::json to_json(const inspect::ThreatRuleSpec& r);

/// Schema readers shared with the admin API and the onboarding overlay.
/// Append to diags and return nullopt on error.
std::optional<RouteConfig> route_from_json(const nlohmann::json& j, const std::string& path,
                                           Diagnostics& diags);
std::optional<BackendServer> backend_from_json(const nlohmann::json& j, const std::string& path,
                                               Diagnostics& diags);
std::optional<MiddlewareSpec> middleware_from_json(const nlohmann::json& j,
                                                   const std::string& path, Diagnostics& diags);
std::optional<inspect::ThreatRuleSpec> rule_from_json(const nlohmann::json& j,
                                                      const std::string& path, Diagnostics& diags);

/// YAML tree to JSON. Plain scalars become null/bool/number when they look
/// like one; quoted scalars stay strings.
std::variant<nlohmann::json, Diagnostic> yaml_to_json(std::string_view yaml_text);

const char* to_string(Permission p);

}  // namespace mcpgw::config
