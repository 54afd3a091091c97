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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcpgw/common/clock.h"

namespace mcpgw::oauth {

inline constexpr std::chrono::seconds kCodeTtl{120};
inline constexpr std::chrono::seconds kTokenTtl{3600};
inline constexpr std::chrono::seconds kSessionTtl{600};
inline constexpr std::size_t kMaxRegistrationBytes = 16 * 1024;

inline constexpr std::string_view kMetadataPath = "/.well-known/oauth-authorization-server";
inline constexpr std::string_view kBaseScope = "mcp";
inline constexpr std::string_view kToolScopePrefix = "mcp:tool:";

struct ClientRegistration {
  std::string client_id;
  std::string client_name;
  std::vector<std::string> redirect_uris;
  std::string token_endpoint_auth_method = "none";
  WallTime created_at{};

  bool operator==(const ClientRegistration&) const = default;
};

/// A login in progress: created by /authorize, consumed by the IdP callback.
struct PendingAuthorization {
  std::string client_id;
  std::string redirect_uri;
  std::string code_challenge;
  std::string scope;
  std::string state;
  std::string resource_host;
  WallTime expires_at{};
};

struct AuthorizationGrant {
  /// Links the grant to the tokens it produced, for replay revocation.
  std::string grant_id;
  std::string client_id;
  std::string redirect_uri;
  std::string code_challenge;
  std::string code_challenge_method = "S256";
  std::string scope;
  std::string subject;
  std::string resource_host;
  WallTime issued_at{};
  WallTime expires_at{};
  bool consumed = false;
};

/// Stored form of an access token; the token value itself is never kept.
struct TokenRecord {
  std::string token_hash;
  std::string grant_id;
  std::string client_id;
  std::string subject;
  std::string scope;
  std::string resource_host;
  WallTime issued_at{};
  WallTime expires_at{};
  bool revoked = false;

  bool operator==(const TokenRecord&) const = default;
};

/// RFC 6749 style error: machine code plus human description.
struct OAuthError {
  std::string error;
  std::string description;
};

struct TokenResponse {
  std::string access_token;
  std::string token_type = "Bearer";
  std::int64_t expires_in = kTokenTtl.count();
  std::string scope;
};

struct OAuthSettings {
  /// Host clients use to reach the authorization server.
  std::string issuer_host;
  /// Scheme advertised in issuer and resource_metadata URLs.
  std::string public_scheme = "https";
  /// Non-zero when the public listener is on a non-default port.
  int public_port = 0;
  std::vector<std::string> stub_idp_users = {"alice"};
  /// Empty keeps OAuth state in memory only.
  std::filesystem::path state_dir;
};

/// True for a space-separated list of "mcp" and "mcp:tool:<name>" tokens.
bool is_valid_scope(std::string_view scope);

/// Whether `scope` permits calling tool `name`: "mcp" covers every tool
/// unless per-tool scopes are present, in which case one must name it.
bool scope_allows_tool(std::string_view scope, std::string_view name);

}  // namespace mcpgw::oauth
