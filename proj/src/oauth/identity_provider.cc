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

#include "mcpgw/oauth/identity_provider.h"

#include <algorithm>

namespace mcpgw::oauth {

namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

HttpResponse StubIdentityProvider::begin(const std::string& session_id) {
  HttpResponse r;
  r.status = 302;
  r.headers.set("Location", "/idp/login?" + encode_params({{"session", session_id}}));
  r.headers.set("Cache-Control", "no-store");
  return r;
}

std::optional<HttpResponse> StubIdentityProvider::handle(const HttpExchange& req) {
  if (req.path != "/idp/login") return std::nullopt;
  auto params = parse_params(req.query);
  auto session = params["session"];
  std::string body =
      "<!doctype html><html><head><meta charset=\"utf-8\"><title>Sign in</title></head><body>"
      "<h1>Development sign-in</h1><ul>";
  for (const auto& user : users_) {
    auto href = std::string(kCallbackPath) + "?" +
                encode_params({{"session", session}, {"user", user}});
    body += "<li><a href=\"" + html_escape(href) + "\">Continue as " + html_escape(user) +
            "</a></li>";
  }
  body += "</ul></body></html>";
  HttpResponse r;
  r.headers.set("Content-Type", "text/html; charset=utf-8");
  r.headers.set("Cache-Control", "no-store");
  r.body = std::move(body);
  return r;
}

std::optional<IdpResult> StubIdentityProvider::callback(const HttpExchange& req) {
  auto params = parse_params(req.query);
  auto session = params.find("session");
  auto user = params.find("user");
  if (session == params.end() || user == params.end() || session->second.empty()) {
    return std::nullopt;
  }
  if (std::find(users_.begin(), users_.end(), user->second) == users_.end()) return std::nullopt;
  return IdpResult{session->second, user->second};
}

}  // namespace mcpgw::oauth
