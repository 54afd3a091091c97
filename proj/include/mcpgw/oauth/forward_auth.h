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

#include <memory>
#include <optional>
#include <string>

#include "mcpgw/common/clock.h"
#include "mcpgw/common/http.h"
#include "mcpgw/common/model.h"

namespace mcpgw::oauth {

class AuthorizationServer;

struct ForwardAuthResult {
  Decision decision;
  /// Set exactly when decision is Continue for an authenticated request.
  std::optional<Claims> claims;
};

/// Identity header added for the backend.
inline constexpr std::string_view kForwardedUserHeader = "X-Forwarded-User";

/// Challenge header value naming the metadata URL under `origin`.
std::string www_authenticate_value(std::string_view origin);

/// The gateway's delegation point: asks an authorization service whether a
/// request may reach a route.
class ForwardAuthenticator {
 public:
  virtual ~ForwardAuthenticator() = default;
  virtual ForwardAuthResult check(const HttpExchange& req, const RouteConfig& route) = 0;
};

/// In-process delegation straight to the AuthorizationServer.
class LocalForwardAuth final : public ForwardAuthenticator {
 public:
  LocalForwardAuth(AuthorizationServer& server, const Clock& clock)
      : server_(server), clock_(clock) {}
  ForwardAuthResult check(const HttpExchange& req, const RouteConfig& route) override;

 private:
  AuthorizationServer& server_;
  const Clock& clock_;
};

/// Delegation over HTTP to an authorization server's /forward-auth
/// endpoint. Any transport failure denies with 500.
class RemoteForwardAuth final : public ForwardAuthenticator {
 public:
  explicit RemoteForwardAuth(std::string base_url) : base_url_(std::move(base_url)) {}
  ForwardAuthResult check(const HttpExchange& req, const RouteConfig& route) override;

 private:
  std::string base_url_;
};

/// The bearer token in a single well-formed "Authorization: Bearer ..."
/// header, else nullopt.
std::optional<std::string> extract_bearer(const Headers& headers);

}  // namespace mcpgw::oauth
