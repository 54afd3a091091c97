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

#include "mcpgw/oauth/forward_auth.h"

#include <httplib.h>

#include <cctype>

#include "mcpgw/oauth/auth_server.h"

namespace mcpgw::oauth {

namespace {

bool is_b64token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_' ||
         c == '~' || c == '+' || c == '/';
}

ShortCircuit challenge(const std::string& origin, std::string_view description) {
  auto sc = short_circuit(401,
                          R"({"error":"invalid_token","error_description":")" +
                              std::string(description) + R"("})",
                          "application/json");
  sc.response.headers.set("WWW-Authenticate", www_authenticate_value(origin));
  sc.response.headers.set("Cache-Control", "no-store");
  return sc;
}

ShortCircuit unavailable() {
  return short_circuit(500, R"({"error":"server_error","error_description":"token store unavailable"})",
                       "application/json");
}

}  // namespace

std::string www_authenticate_value(std::string_view origin) {
  return "Bearer resource_metadata=\"" + std::string(origin) + std::string(kMetadataPath) + "\"";
}

std::optional<std::string> extract_bearer(const Headers& headers) {
  auto values = headers.get_all("Authorization");
  if (values.size() != 1) return std::nullopt;
  std::string_view v = values.front();
  if (v.size() < 7 || !iequals(v.substr(0, 6), "bearer") || v[6] != ' ') return std::nullopt;
  std::size_t i = 7;
  while (i < v.size() && v[i] == ' ') ++i;
  std::size_t start = i;
  while (i < v.size() && is_b64token_char(v[i])) ++i;
  if (i == start) return std::nullopt;
  while (i < v.size() && v[i] == '=') ++i;
  if (i != v.size()) return std::nullopt;
  return std::string(v.substr(start));
}

ForwardAuthResult LocalForwardAuth::check(const HttpExchange& req, const RouteConfig& route) {
  // Discovery must stay reachable so a client can learn how to get a token.
  if (req.path == kMetadataPath) return {Continue{}, std::nullopt};
  auto origin = server_.origin_for(route.host_rule);
  auto token = extract_bearer(req.headers);
  if (!token) return {challenge(origin, "bearer token required"), std::nullopt};
  std::optional<Claims> claims;
  try {
    claims = server_.validate_token(*token, route.host_rule, clock_.wall_now());
  } catch (const std::exception&) {
    return {unavailable(), std::nullopt};
  }
  if (!claims) return {challenge(origin, "token is not valid for this host"), std::nullopt};
  Continue c;
  c.header_mutations.emplace_back(std::string(kForwardedUserHeader), claims->subject);
  return {c, claims};
}

ForwardAuthResult RemoteForwardAuth::check(const HttpExchange& req, const RouteConfig& route) {
  auto url = parse_url(base_url_);
  if (!url) return {unavailable(), std::nullopt};
  httplib::Client client(url->origin());
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  httplib::Headers h;
  h.emplace("X-Forwarded-Host", route.host_rule);
  h.emplace("X-Forwarded-Uri", req.query.empty() ? req.path : req.path + "?" + req.query);
  h.emplace("X-Forwarded-Method", req.method);
  for (const auto& v : req.headers.get_all("Authorization")) h.emplace("Authorization", v);
  auto path = url->path == "/" ? std::string("/forward-auth") : url->path;
  auto res = client.Get(path, h);
  if (!res) return {unavailable(), std::nullopt};
  if (res->status == 200) {
    if (!res->has_header(std::string(kForwardedUserHeader))) return {Continue{}, std::nullopt};
    Claims claims{res->get_header_value(std::string(kForwardedUserHeader)),
                  res->get_header_value("X-Auth-Scope"), res->get_header_value("X-Auth-Client-Id")};
    Continue c;
    c.header_mutations.emplace_back(std::string(kForwardedUserHeader), claims.subject);
    return {c, claims};
  }
  if (res->status == 401 || res->status == 403) {
    ShortCircuit sc;
    sc.response.status = res->status;
    for (const auto& name : {"WWW-Authenticate", "Content-Type", "Cache-Control"}) {
      if (res->has_header(name)) sc.response.headers.set(name, res->get_header_value(name));
    }
    sc.response.body = res->body;
    return {sc, std::nullopt};
  }
  return {unavailable(), std::nullopt};
}

}  // namespace mcpgw::oauth
