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

#include "mcpgw/oauth/auth_server.h"

#include <algorithm>

#include "mcpgw/common/crypto.h"
#include "mcpgw/common/redact.h"
#include "mcpgw/oauth/forward_auth.h"

namespace mcpgw::oauth {

using nlohmann::json;

namespace {

constexpr std::string_view kRegisterPath = "/register";
constexpr std::string_view kAuthorizePath = "/authorize";
constexpr std::string_view kTokenPath = "/token";
constexpr std::string_view kForwardAuthPath = "/forward-auth";

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// Terminal error shown to the user agent; never redirects.
HttpResponse error_page(std::string_view message) {
  HttpResponse r;
  r.status = 400;
  r.headers.set("Content-Type", "text/html; charset=utf-8");
  r.headers.set("Cache-Control", "no-store");
  r.body = "<!doctype html><html><body><h1>Authorization failed</h1><p>" + html_escape(message) +
           "</p></body></html>";
  return r;
}

std::string append_query(std::string_view uri, std::string_view query) {
  std::string out(uri);
  out += uri.find('?') == std::string_view::npos ? '?' : '&';
  out += query;
  return out;
}

HttpResponse redirect_to(std::string location) {
  HttpResponse r;
  r.status = 302;
  r.headers.set("Location", std::move(location));
  r.headers.set("Cache-Control", "no-store");
  return r;
}

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.headers.set("Content-Type", "application/json");
  r.headers.set("Cache-Control", "no-store");
  r.body = body.dump();
  return r;
}

void add_cors(HttpResponse& r) {
  r.headers.set("Access-Control-Allow-Origin", "*");
  r.headers.set("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  r.headers.set("Access-Control-Allow-Headers", "Authorization, Content-Type, mcp-protocol-version");
}

bool valid_redirect_uri(std::string_view s) {
  auto u = parse_url(s);
  if (!u || u->has_fragment || !u->userinfo.empty() || u->host.empty()) return false;
  if (u->scheme == "https") return true;
  return u->scheme == "http" && is_loopback_host(u->host);
}

bool valid_challenge(std::string_view c) {
  // Same length and alphabet rules as a verifier.
  return crypto::is_valid_pkce_verifier(c);
}

}  // namespace

HttpResponse oauth_error_response(int status, const OAuthError& err) {
  json j = {{"error", err.error}};
  if (!err.description.empty()) j["error_description"] = err.description;
  return json_response(status, j);
}

json to_json(const ClientRegistration& c) {
  return {{"client_id", c.client_id},
          {"client_id_issued_at",
           std::chrono::duration_cast<std::chrono::seconds>(c.created_at.time_since_epoch())
               .count()},
          {"client_name", c.client_name},
          {"redirect_uris", c.redirect_uris},
          {"token_endpoint_auth_method", c.token_endpoint_auth_method},
          {"grant_types", {"authorization_code"}},
          {"response_types", {"code"}}};
}

AuthorizationServer::AuthorizationServer(OAuthSettings settings,
                                         std::shared_ptr<IdentityProvider> idp,
                                         const Clock& clock, audit::AuditSink* audit,
                                         std::function<bool(std::string_view)> is_resource_host)
    : settings_(std::move(settings)),
      idp_(std::move(idp)),
      clock_(clock),
      audit_(audit),
      is_resource_host_(std::move(is_resource_host)),
      store_(settings_.state_dir.empty() ? std::filesystem::path{}
                                         : settings_.state_dir / "oauth") {
  if (!idp_) idp_ = std::make_shared<StubIdentityProvider>(settings_.stub_idp_users);
}

std::string AuthorizationServer::origin_for(std::string_view host) const {
  std::string out = settings_.public_scheme + "://" + std::string(host);
  int p = settings_.public_port;
  bool default_port = p == 0 || (settings_.public_scheme == "https" && p == 443) ||
                      (settings_.public_scheme == "http" && p == 80);
  if (!default_port) out += ":" + std::to_string(p);
  return out;
}

std::string AuthorizationServer::issuer() const { return origin_for(settings_.issuer_host); }

json AuthorizationServer::metadata_document() const {
  auto base = issuer();
  return {{"issuer", base},
          {"authorization_endpoint", base + std::string(kAuthorizePath)},
          {"token_endpoint", base + std::string(kTokenPath)},
          {"registration_endpoint", base + std::string(kRegisterPath)},
          {"response_types_supported", {"code"}},
          {"grant_types_supported", {"authorization_code"}},
          {"code_challenge_methods_supported", {"S256"}},
          {"token_endpoint_auth_methods_supported", {"none"}}};
}

void AuthorizationServer::audit_event(std::string_view event, audit::Summary summary) {
  if (!audit_) return;
  summary["event"] = std::string(event);
  audit_->append(audit::Kind::auth_event, summary);
}

std::variant<ClientRegistration, OAuthError> AuthorizationServer::register_client(
    std::string_view body) {
  if (body.size() > kMaxRegistrationBytes) {
    return OAuthError{"invalid_client_metadata", "registration request exceeds 16 KiB"};
  }
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return OAuthError{"invalid_client_metadata", "body must be a JSON object"};
  }
  auto uris = j.find("redirect_uris");
  if (uris == j.end() || !uris->is_array() || uris->empty()) {
    return OAuthError{"invalid_redirect_uri", "redirect_uris is required"};
  }
  ClientRegistration c;
  for (const auto& u : *uris) {
    if (!u.is_string() || !valid_redirect_uri(u.get<std::string>())) {
      return OAuthError{"invalid_redirect_uri",
                        "redirect URIs must be absolute https (or loopback http) without a "
                        "fragment"};
    }
    c.redirect_uris.push_back(u.get<std::string>());
  }
  if (auto m = j.find("token_endpoint_auth_method"); m != j.end()) {
    if (!m->is_string() || m->get<std::string>() != "none") {
      return OAuthError{"invalid_client_metadata", "only public clients (none) are supported"};
    }
  }
  if (auto n = j.find("client_name"); n != j.end()) {
    if (!n->is_string()) return OAuthError{"invalid_client_metadata", "client_name must be a string"};
    c.client_name = n->get<std::string>().substr(0, 256);
  }
  c.client_id = crypto::random_token(16);
  c.created_at = clock_.wall_now();
  store_.add_client(c);
  audit_event("client_registered", {{"client_id", c.client_id}});
  return c;
}

void AuthorizationServer::prune_locked(WallTime now) {
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.expires_at <= now; });
  // Consumed grants outlive the code TTL so a late replay still revokes.
  std::erase_if(grants_, [&](const auto& kv) {
    const auto& g = kv.second;
    return g.consumed ? g.issued_at + kTokenTtl <= now : g.expires_at <= now;
  });
}

HttpResponse AuthorizationServer::begin_authorization(const ParamMap& params,
                                                      const std::vector<std::string>& dups) {
  auto get = [&](const char* k) -> std::string {
    auto it = params.find(k);
    return it == params.end() ? std::string{} : it->second;
  };
  auto client_id = get("client_id");
  auto client = client_id.empty() ? std::nullopt : store_.find_client(client_id);
  if (!client) return error_page("Unknown client.");
  auto redirect_uri = get("redirect_uri");
  if (std::find(client->redirect_uris.begin(), client->redirect_uris.end(), redirect_uri) ==
      client->redirect_uris.end()) {
    return error_page("The redirect_uri is not registered for this client.");
  }

  // From here on the redirect target is trusted, so errors go back to it.
  auto state = get("state");
  auto fail = [&](std::string_view error, std::string_view description) {
    std::vector<std::pair<std::string, std::string>> q{{"error", std::string(error)},
                                                       {"error_description",
                                                        std::string(description)}};
    if (!state.empty()) q.emplace_back("state", state);
    audit_event("authorization_rejected", {{"client_id", client_id}, {"reason", std::string(error)}});
    return redirect_to(append_query(redirect_uri, encode_params(q)));
  };
  if (!dups.empty()) return fail("invalid_request", "repeated parameter " + dups.front());
  if (get("response_type") != "code") {
    return fail("unsupported_response_type", "response_type must be code");
  }
  auto challenge = get("code_challenge");
  if (challenge.empty()) return fail("invalid_request", "code_challenge is required");
  if (get("code_challenge_method") != "S256") {
    return fail("invalid_request", "code_challenge_method must be S256");
  }
  if (!valid_challenge(challenge)) return fail("invalid_request", "malformed code_challenge");
  if (state.empty()) return fail("invalid_request", "state is required");
  auto scope = params.count("scope") ? get("scope") : std::string(kBaseScope);
  if (!is_valid_scope(scope)) return fail("invalid_scope", "unsupported scope");
  auto resource = parse_url(get("resource"));
  if (!resource || resource->host.empty()) {
    return fail("invalid_target", "resource must name the MCP server URL");
  }
  if (!is_resource_host_ || !is_resource_host_(resource->host)) {
    return fail("invalid_target", "resource is not served by this gateway");
  }

  auto session_id = crypto::random_token(32, kSessionPrefix);
  auto now = clock_.wall_now();
  {
    std::lock_guard lock(mu_);
    prune_locked(now);
    sessions_[store_.hash(session_id)] = PendingAuthorization{
        client_id, redirect_uri, challenge, scope, state, resource->host, now + kSessionTtl};
  }
  audit_event("authorization_started",
              {{"client_id", client_id}, {"resource_host", resource->host}, {"scope", scope}});
  return idp_->begin(session_id);
}

HttpResponse AuthorizationServer::complete_authorization(std::string_view session_id,
                                                         std::string_view subject) {
  auto now = clock_.wall_now();
  std::optional<PendingAuthorization> pending;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(store_.hash(session_id));
    if (it != sessions_.end()) {
      pending = std::move(it->second);
      sessions_.erase(it);  // single use, whatever happens next
    }
  }
  if (!pending || pending->expires_at <= now) {
    return error_page("This sign-in session is no longer valid.");
  }
  auto code = crypto::random_token(32, kAuthCodePrefix);
  AuthorizationGrant g;
  g.grant_id = crypto::to_hex(crypto::random_bytes(12));
  g.client_id = pending->client_id;
  g.redirect_uri = pending->redirect_uri;
  g.code_challenge = pending->code_challenge;
  g.scope = pending->scope;
  g.subject = std::string(subject);
  g.resource_host = pending->resource_host;
  g.issued_at = now;
  g.expires_at = now + kCodeTtl;
  {
    std::lock_guard lock(mu_);
    grants_[store_.hash(code)] = g;
  }
  audit_event("authorization_completed", {{"client_id", g.client_id},
                                          {"subject", g.subject},
                                          {"grant_id", g.grant_id}});
  return redirect_to(
      append_query(g.redirect_uri, encode_params({{"code", code}, {"state", pending->state}})));
}

std::variant<TokenResponse, OAuthError> AuthorizationServer::exchange_token(
    const ParamMap& params) {
  auto get = [&](const char* k) -> std::string {
    auto it = params.find(k);
    return it == params.end() ? std::string{} : it->second;
  };
  auto grant_type = get("grant_type");
  if (grant_type.empty()) return OAuthError{"invalid_request", "grant_type is required"};
  if (grant_type != "authorization_code") {
    return OAuthError{"unsupported_grant_type", "only authorization_code is supported"};
  }
  auto code = get("code");
  if (code.empty()) return OAuthError{"invalid_request", "code is required"};

  auto now = clock_.wall_now();
  AuthorizationGrant g;
  bool replay = false;
  {
    std::lock_guard lock(mu_);
    prune_locked(now);
    auto it = grants_.find(store_.hash(code));
    if (it == grants_.end()) {
      audit_event("token_denied", {{"reason", "unknown_code"}});
      return OAuthError{"invalid_grant", "authorization code is invalid"};
    }
    replay = it->second.consumed;
    // Every attempt burns the code, so a failed guess cannot be retried.
    it->second.consumed = true;
    g = it->second;
  }
  if (replay) {
    int revoked = store_.revoke_grant(g.grant_id);
    audit_event("code_replay", {{"client_id", g.client_id},
                                {"grant_id", g.grant_id},
                                {"revoked_tokens", std::to_string(revoked)}});
    return OAuthError{"invalid_grant", "authorization code was already used"};
  }
  auto deny = [&](std::string_view reason) -> std::variant<TokenResponse, OAuthError> {
    audit_event("token_denied", {{"client_id", g.client_id}, {"reason", std::string(reason)}});
    return OAuthError{"invalid_grant", std::string(reason)};
  };
  if (now >= g.expires_at) return deny("authorization code expired");
  if (get("client_id") != g.client_id) return deny("client_id does not match the grant");
  if (get("redirect_uri") != g.redirect_uri) return deny("redirect_uri does not match the grant");
  auto verifier = get("code_verifier");
  if (!crypto::is_valid_pkce_verifier(verifier) ||
      !crypto::constant_time_equal(crypto::pkce_s256(verifier), g.code_challenge)) {
    return deny("code_verifier does not match the challenge");
  }

  auto token = crypto::random_token(32, kAccessTokenPrefix);
  TokenRecord rec;
  rec.token_hash = store_.hash(token);
  rec.grant_id = g.grant_id;
  rec.client_id = g.client_id;
  rec.subject = g.subject;
  rec.scope = g.scope;
  rec.resource_host = g.resource_host;
  rec.issued_at = now;
  rec.expires_at = now + kTokenTtl;
  store_.add_token(rec);
  audit_event("token_issued", {{"client_id", rec.client_id},
                               {"subject", rec.subject},
                               {"resource_host", rec.resource_host},
                               {"scope", rec.scope},
                               {"grant_id", rec.grant_id}});
  return TokenResponse{token, "Bearer", kTokenTtl.count(), rec.scope};
}

std::optional<Claims> AuthorizationServer::validate_token(std::string_view token,
                                                          std::string_view resource_host,
                                                          WallTime now) {
  if (!token.starts_with(kAccessTokenPrefix)) return std::nullopt;
  auto rec = store_.find_token(store_.hash(token));
  if (!rec || rec->revoked || !(now < rec->expires_at) || rec->resource_host != resource_host) {
    return std::nullopt;
  }
  return Claims{rec->subject, rec->scope, rec->client_id};
}

std::string AuthorizationServer::mint_token(std::string_view subject,
                                            std::string_view resource_host,
                                            std::string_view scope, std::string_view client_id) {
  auto now = clock_.wall_now();
  auto token = crypto::random_token(32, kAccessTokenPrefix);
  TokenRecord rec;
  rec.token_hash = store_.hash(token);
  rec.grant_id = "minted-" + crypto::to_hex(crypto::random_bytes(8));
  rec.client_id = std::string(client_id);
  rec.subject = std::string(subject);
  rec.scope = std::string(scope);
  rec.resource_host = std::string(resource_host);
  rec.issued_at = now;
  rec.expires_at = now + kTokenTtl;
  store_.add_token(rec);
  audit_event("token_minted", {{"subject", rec.subject}, {"resource_host", rec.resource_host}});
  return token;
}

HttpResponse AuthorizationServer::handle_register(const HttpExchange& req) {
  auto result = register_client(req.body);
  if (auto* err = std::get_if<OAuthError>(&result)) return oauth_error_response(400, *err);
  return json_response(201, to_json(std::get<ClientRegistration>(result)));
}

HttpResponse AuthorizationServer::handle_token(const HttpExchange& req) {
  auto ct = to_lower(req.headers.get("Content-Type").value_or(""));
  if (!ct.starts_with("application/x-www-form-urlencoded")) {
    return oauth_error_response(
        400, {"invalid_request", "body must be application/x-www-form-urlencoded"});
  }
  std::vector<std::string> dups;
  auto params = parse_params(req.body, &dups);
  if (!dups.empty()) return oauth_error_response(400, {"invalid_request", "repeated parameter"});
  auto result = exchange_token(params);
  if (auto* err = std::get_if<OAuthError>(&result)) return oauth_error_response(400, *err);
  const auto& t = std::get<TokenResponse>(result);
  return json_response(200, {{"access_token", t.access_token},
                             {"token_type", t.token_type},
                             {"expires_in", t.expires_in},
                             {"scope", t.scope}});
}

HttpResponse AuthorizationServer::handle_idp_callback(const HttpExchange& req) {
  auto result = idp_->callback(req);
  if (!result) return error_page("Sign-in was not completed.");
  return complete_authorization(result->session_id, result->subject);
}

HttpResponse AuthorizationServer::handle_forward_auth(const HttpExchange& req) {
  if (!is_loopback_host(req.peer.ip)) {
    return oauth_error_response(403, {"access_denied", "forward-auth is loopback only"});
  }
  auto host = normalize_host(req.headers.get("X-Forwarded-Host").value_or(""));
  if (!host) return oauth_error_response(400, {"invalid_request", "X-Forwarded-Host required"});
  HttpExchange probe;
  probe.method = req.headers.get("X-Forwarded-Method").value_or("GET");
  probe.host = *host;
  auto uri = req.headers.get("X-Forwarded-Uri").value_or("/");
  auto q = uri.find('?');
  probe.path = normalize_path(uri.substr(0, q)).value_or("/");
  if (q != std::string::npos) probe.query = uri.substr(q + 1);
  for (const auto& v : req.headers.get_all("Authorization")) probe.headers.add("Authorization", v);
  probe.peer = req.peer;

  RouteConfig route;
  route.host_rule = *host;
  LocalForwardAuth local(*this, clock_);
  auto result = local.check(probe, route);
  if (auto* sc = std::get_if<ShortCircuit>(&result.decision)) return sc->response;
  HttpResponse ok;
  ok.status = 200;
  if (result.claims) {
    ok.headers.set(std::string(kForwardedUserHeader), result.claims->subject);
    ok.headers.set("X-Auth-Client-Id", result.claims->client_id);
    ok.headers.set("X-Auth-Scope", result.claims->scope);
  }
  return ok;
}

HttpResponse AuthorizationServer::handle(const HttpExchange& req) {
  const auto& p = req.path;
  bool cors_path = p == kMetadataPath || p == kRegisterPath || p == kTokenPath;
  if (req.method == "OPTIONS" && cors_path) {
    HttpResponse r;
    r.status = 204;
    add_cors(r);
    return r;
  }
  auto only = [&](std::string_view method) -> std::optional<HttpResponse> {
    if (req.method == method || (method == "GET" && req.method == "HEAD")) return std::nullopt;
    HttpResponse r = oauth_error_response(405, {"invalid_request", "method not allowed"});
    r.headers.set("Allow", std::string(method));
    return r;
  };

  HttpResponse r;
  if (p == kMetadataPath) {
    if (auto bad = only("GET")) return *bad;
    r = json_response(200, metadata_document());
    r.headers.set("Cache-Control", "public, max-age=300");
  } else if (p == kRegisterPath) {
    if (auto bad = only("POST")) return *bad;
    r = handle_register(req);
  } else if (p == kTokenPath) {
    if (auto bad = only("POST")) return *bad;
    r = handle_token(req);
  } else if (p == kAuthorizePath) {
    if (auto bad = only("GET")) return *bad;
    std::vector<std::string> dups;
    auto params = parse_params(req.query, &dups);
    return begin_authorization(params, dups);
  } else if (p == IdentityProvider::kCallbackPath) {
    if (auto bad = only("GET")) return *bad;
    return handle_idp_callback(req);
  } else if (p == kForwardAuthPath) {
    return handle_forward_auth(req);
  } else if (auto idp = idp_->handle(req)) {
    return *idp;
  } else {
    return oauth_error_response(404, {"not_found", "no such endpoint"});
  }
  if (cors_path) add_cors(r);
  return r;
}

}  // namespace mcpgw::oauth
