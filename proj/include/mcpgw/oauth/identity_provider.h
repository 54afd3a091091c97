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

#include <optional>
#include <string>
#include <vector>

#include "mcpgw/common/http.h"

namespace mcpgw::oauth {

/// Where an external login ended: which pending session it was for and who
/// logged in.
struct IdpResult {
  std::string session_id;
  std::string subject;
};

/// Pluggable user authentication. The authorization server hands the IdP a
/// session id; the IdP later calls back with that id and a subject.
class IdentityProvider {
 public:
  virtual ~IdentityProvider() = default;

  /// Response that sends the user agent off to log in.
  virtual HttpResponse begin(const std::string& session_id) = 0;

  /// Serves the IdP's own pages under /idp/. nullopt for paths it does not
  /// own.
  virtual std::optional<HttpResponse> handle(const HttpExchange& req) = 0;

  /// Parses the callback request. nullopt when the login was refused or
  /// the request is malformed.
  virtual std::optional<IdpResult> callback(const HttpExchange& req) = 0;

  static constexpr std::string_view kCallbackPath = "/idp/callback";
};

/// Auto-approving IdP for development and tests: one click per configured
/// user, no passwords.
class StubIdentityProvider final : public IdentityProvider {
 public:
  explicit StubIdentityProvider(std::vector<std::string> users) : users_(std::move(users)) {}

  HttpResponse begin(const std::string& session_id) override;
  std::optional<HttpResponse> handle(const HttpExchange& req) override;
  std::optional<IdpResult> callback(const HttpExchange& req) override;

 private:
  std::vector<std::string> users_;
};

}  // namespace mcpgw::oauth
