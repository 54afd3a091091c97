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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/clock.h"
#include "mcpgw/common/http.h"
#include "mcpgw/common/model.h"
#include "mcpgw/oauth/identity_provider.h"
#include "mcpgw/oauth/token_store.h"
#include "mcpgw/oauth/types.h"

namespace mcpgw::oauth {

/// OAuth 2.1 authorization server for public clients: metadata discovery,
/// dynamic registration, authorization code + PKCE (S256 only) and bearer
/// token issuance. Tokens are opaque handles bound to one resource host.
class AuthorizationServer {
 public:
  /// `is_resource_host` says whether a host is served by some route; a
  /// token can only be requested for such a host.
  AuthorizationServer(OAuthSettings settings, std::shared_ptr<IdentityProvider> idp,
                      const Clock& clock, audit::AuditSink* audit,
                      std::function<bool(std::string_view)> is_resource_host);

  const OAuthSettings& settings() const { return settings_; }

  /// "https://oauth.example.test" (port appended when non-default).
  std::string issuer() const;
  /// Same origin shape as issuer() but for another host.
  std::string origin_for(std::string_view host) const;

  nlohmann::json metadata_document() const;

  std::variant<ClientRegistration, OAuthError> register_client(std::string_view body);

  /// 302 to the IdP on success, 302 back to the client with ?error= for
  /// request errors, and a 400 page (no Location) when the client or its
  /// redirect_uri cannot be trusted.
  HttpResponse begin_authorization(const ParamMap& params, const std::vector<std::string>& dups = {});

  /// 302 to the client's redirect_uri carrying code and state, or a 400
  /// page unless the session is live and unconsumed.
  HttpResponse complete_authorization(std::string_view session_id, std::string_view subject);

  std::variant<TokenResponse, OAuthError> exchange_token(const ParamMap& params);

  /// Claims iff the token exists, now < expires_at, it is not revoked and
  /// it was issued for `resource_host`.
  std::optional<Claims> validate_token(std::string_view token, std::string_view resource_host,
                                       WallTime now);

  /// Issues a token without the browser flow. For --dev tooling only.
  std::string mint_token(std::string_view subject, std::string_view resource_host,
                         std::string_view scope = kBaseScope, std::string_view client_id = "dev");

  /// Dispatches an HTTP request addressed to the issuer host.
  HttpResponse handle(const HttpExchange& req);

  TokenStore& store() { return store_; }

 private:
  HttpResponse handle_register(const HttpExchange& req);
  HttpResponse handle_token(const HttpExchange& req);
  HttpResponse handle_idp_callback(const HttpExchange& req);
  HttpResponse handle_forward_auth(const HttpExchange& req);
  void audit_event(std::string_view event, audit::Summary summary);
  void prune_locked(WallTime now);

  OAuthSettings settings_;
  std::shared_ptr<IdentityProvider> idp_;
  const Clock& clock_;
  audit::AuditSink* audit_;
  std::function<bool(std::string_view)> is_resource_host_;
  TokenStore store_;

  std::mutex mu_;
  // Keyed by salted hash of the session id / code.
  std::map<std::string, PendingAuthorization> sessions_;
  std::map<std::string, AuthorizationGrant> grants_;
};

/// JSON body {"error": ..., "error_description": ...}.
HttpResponse oauth_error_response(int status, const OAuthError& err);

nlohmann::json to_json(const ClientRegistration& c);

}  // namespace mcpgw::oauth
