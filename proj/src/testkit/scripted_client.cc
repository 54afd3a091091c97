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

#include "mcpgw/testkit/scripted_client.h"

#include <json.hpp>

#include <regex>
#include <sstream>

#include "mcpgw/common/crypto.h"
#include "mcpgw/common/http.h"
#include "mcpgw/testkit/sse_reader.h"

namespace mcpgw::testkit {

using nlohmann::json;

bool Transcript::passed() const {
  if (steps.size() != 7) return false;
  for (const auto& s : steps) {
    if (!s.passed) return false;
  }
  return true;
}

std::optional<int> Transcript::failed_step() const {
  for (const auto& s : steps) {
    if (!s.passed) return s.number;
  }
  return std::nullopt;
}

std::string Transcript::describe() const {
  std::ostringstream out;
  for (const auto& s : steps) {
    out << "step " << s.number << " " << s.name << ": " << (s.passed ? "ok" : "FAILED")
        << " (status " << s.status << ") " << s.detail << "\n";
  }
  return out.str();
}

namespace {

struct Reply {
  int status = 0;
  httplib::Headers headers;
  std::string body;
  std::string header(const std::string& name) const {
    auto it = headers.find(name);
    return it == headers.end() ? "" : it->second;
  }
};

class Flow {
 public:
  explicit Flow(const ClientOptions& o) : o_(o) {}

  Transcript run() {
    auto start = std::chrono::steady_clock::now();
    (void)(step1() && step2() && step3() && step4() && step5() && step6() && step7());
    t_.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return std::move(t_);
  }

 private:
  TranscriptStep& begin(int n, std::string name) {
    t_.steps.push_back({n, std::move(name), false, 0, {}});
    return t_.steps.back();
  }

  bool fail(TranscriptStep& s, std::string detail) {
    s.detail = std::move(detail);
    s.passed = false;
    return false;
  }

  bool pass(TranscriptStep& s, std::string detail = {}) {
    s.detail = std::move(detail);
    s.passed = true;
    return true;
  }

  /// Absolute URL, resolving a path-only reference against `base`.
  static std::optional<Url> resolve(const std::string& ref, const Url& base) {
    if (!ref.empty() && ref.front() == '/') {
      return parse_url(base.origin() + ref);
    }
    return parse_url(ref);
  }

  std::unique_ptr<httplib::Client> client() const {
    auto c = std::make_unique<httplib::Client>(o_.connect_host, o_.connect_port);
    c->set_connection_timeout(o_.step_timeout);
    c->set_read_timeout(o_.step_timeout);
    c->set_follow_location(false);
    return c;
  }

  static std::string target(const Url& u) {
    std::string t = u.path.empty() ? "/" : u.path;
    if (!u.query.empty()) t += "?" + u.query;
    return t;
  }

  Reply send(const std::string& method, const Url& url, httplib::Headers headers,
             const std::string& body = {}, const std::string& content_type = {},
             bool headers_only = false) {
    auto c = client();
    headers.emplace("Host", url.host);
    httplib::Request req;
    req.method = method;
    req.path = target(url);
    req.headers = std::move(headers);
    req.body = body;
    if (!content_type.empty()) req.headers.emplace("Content-Type", content_type);
    Reply out;
    if (headers_only) {
      req.response_handler = [&](const httplib::Response& r) {
        out.status = r.status;
        out.headers = r.headers;
        return r.status != 200;
      };
    }
    httplib::Response res;
    httplib::Error err;
    c->send(req, res, err);
    if (out.status == 0) {
      out.status = res.status == -1 ? 0 : res.status;
      out.headers = res.headers;
    }
    out.body = res.body;
    return out;
  }

  bool step1() {
    auto& s = begin(1, "unauthenticated request");
    auto url = parse_url(o_.resource_url);
    if (!url) return fail(s, "bad resource_url");
    resource_ = *url;
    auto r = send("GET", resource_, {{"Accept", "text/event-stream"}}, {}, {}, true);
    s.status = r.status;
    if (r.status != 401) return fail(s, "expected 401, got " + std::to_string(r.status));
    auto challenge = r.header("WWW-Authenticate");
    std::smatch m;
    static const std::regex kMeta(R"re(resource_metadata="([^"]+)")re");
    if (!std::regex_search(challenge, m, kMeta)) {
      return fail(s, "401 without a resource_metadata challenge");
    }
    auto meta = parse_url(m[1].str());
    if (!meta) return fail(s, "unparsable metadata URL");
    metadata_url_ = *meta;
    return pass(s, "challenge names " + m[1].str());
  }

  bool step2() {
    auto& s = begin(2, "metadata discovery");
    auto r = send("GET", metadata_url_, {{"Accept", "application/json"}});
    s.status = r.status;
    if (r.status != 308) return fail(s, "expected 308 to the issuer, got " + std::to_string(r.status));
    auto loc = resolve(r.header("Location"), metadata_url_);
    if (!loc) return fail(s, "redirect without a usable Location");
    auto doc_reply = send("GET", *loc, {{"Accept", "application/json"}});
    if (doc_reply.status != 200) {
      s.status = doc_reply.status;
      return fail(s, "metadata fetch returned " + std::to_string(doc_reply.status));
    }
    auto doc = json::parse(doc_reply.body, nullptr, false);
    for (auto key : {"authorization_endpoint", "token_endpoint", "registration_endpoint"}) {
      if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string()) {
        return fail(s, std::string("metadata lacks ") + key);
      }
    }
    auto methods = doc.value("code_challenge_methods_supported", json::array());
    if (std::find(methods.begin(), methods.end(), "S256") == methods.end()) {
      return fail(s, "issuer does not offer S256");
    }
    authorize_ = parse_url(doc["authorization_endpoint"].get<std::string>()).value_or(Url{});
    token_ = parse_url(doc["token_endpoint"].get<std::string>()).value_or(Url{});
    register_ = parse_url(doc["registration_endpoint"].get<std::string>()).value_or(Url{});
    return pass(s, "followed 308 to " + loc->origin());
  }

  bool step3() {
    auto& s = begin(3, "dynamic client registration");
    json body = {{"client_name", "testkit scripted client"},
                 {"redirect_uris", {o_.redirect_uri}},
                 {"token_endpoint_auth_method", "none"},
                 {"grant_types", {"authorization_code"}},
                 {"response_types", {"code"}}};
    auto r = send("POST", register_, {}, body.dump(), "application/json");
    s.status = r.status;
    if (r.status != 201) return fail(s, "expected 201, got " + std::to_string(r.status));
    auto j = json::parse(r.body, nullptr, false);
    if (!j.is_object() || !j.contains("client_id")) return fail(s, "no client_id");
    t_.client_id = j["client_id"].get<std::string>();
    return pass(s);
  }

  bool step4() {
    auto& s = begin(4, "authorization request with PKCE");
    verifier_ = crypto::random_token(48);
    state_ = crypto::random_token(16);
    auto challenge = crypto::pkce_s256(verifier_);
    Url u = authorize_;
    u.query = encode_params({{"response_type", "code"},
                             {"client_id", t_.client_id},
                             {"redirect_uri", o_.redirect_uri},
                             {"code_challenge", challenge},
                             {"code_challenge_method", "S256"},
                             {"state", state_},
                             {"resource", o_.resource_url}});
    auto r = send("GET", u, {});
    s.status = r.status;
    if (r.status != 302) return fail(s, "expected 302 to the login page, got " + std::to_string(r.status));
    auto loc = resolve(r.header("Location"), authorize_);
    if (!loc) return fail(s, "no Location");
    if (loc->query.find("error=") != std::string::npos && loc->path != "/idp/login") {
      return fail(s, "authorization refused: " + loc->query);
    }
    login_ = *loc;
    return pass(s);
  }

  bool step5() {
    auto& s = begin(5, "stub identity provider login");
    auto page = send("GET", login_, {});
    s.status = page.status;
    if (page.status != 200) return fail(s, "login page returned " + std::to_string(page.status));
    std::regex href(R"re(href="([^"]*)")re");
    std::string link;
    for (auto it = std::sregex_iterator(page.body.begin(), page.body.end(), href);
         it != std::sregex_iterator(); ++it) {
      std::string h = (*it)[1].str();
      std::string unescaped;
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (h.compare(i, 5, "&amp;") == 0) {
          unescaped.push_back('&');
          i += 4;
        } else {
          unescaped.push_back(h[i]);
        }
      }
      auto q = unescaped.find('?');
      if (q == std::string::npos) continue;
      if (parse_params(unescaped.substr(q + 1))["user"] == o_.user) link = unescaped;
    }
    if (link.empty()) return fail(s, "no login link for " + o_.user);
    auto cb_url = resolve(link, login_);
    if (!cb_url) return fail(s, "bad login link");
    auto r = send("GET", *cb_url, {});
    s.status = r.status;
    if (r.status != 302) return fail(s, "expected 302 back to the client, got " + std::to_string(r.status));
    auto back = parse_url(r.header("Location"));
    if (!back) return fail(s, "no redirect to the client");
    auto q = parse_params(back->query);
    if (q.count("error")) return fail(s, "login refused: " + q["error"]);
    if (q["state"] != state_) return fail(s, "state mismatch");
    if (q["code"].empty()) return fail(s, "no code");
    code_ = q["code"];
    t_.codes.push_back(code_);
    return pass(s);
  }

  bool step6() {
    auto& s = begin(6, "token exchange");
    std::string verifier = o_.verifier_override.value_or(verifier_);
    auto body = encode_params({{"grant_type", "authorization_code"},
                               {"code", code_},
                               {"redirect_uri", o_.redirect_uri},
                               {"client_id", t_.client_id},
                               {"code_verifier", verifier}});
    auto r = send("POST", token_, {}, body, "application/x-www-form-urlencoded");
    s.status = r.status;
    auto j = json::parse(r.body, nullptr, false);
    if (r.status != 200) {
      if (j.is_object() && j.contains("error")) t_.token_error = j["error"].get<std::string>();
      return fail(s, "expected 200, got " + std::to_string(r.status) + " " + t_.token_error);
    }
    if (!j.is_object() || !j.contains("access_token")) return fail(s, "no access_token");
    if (!iequals(j.value("token_type", ""), "bearer")) return fail(s, "token_type is not Bearer");
    t_.access_token = j["access_token"].get<std::string>();
    return pass(s);
  }

  bool step7() {
    auto& s = begin(7, "authenticated retry");
    httplib::Headers h{{"Host", resource_.host},
                       {"Authorization", "Bearer " + t_.access_token},
                       {"Accept", "text/event-stream"}};
    auto stream = SseReader::open(o_.connect_host, o_.connect_port, target(resource_), h,
                                  o_.step_timeout);
    s.status = stream->status();
    if (stream->status() != 200) {
      return fail(s, "expected 200 event stream, got " + std::to_string(stream->status()));
    }
    auto endpoint = stream->next(o_.step_timeout);
    if (!endpoint || endpoint->event != "endpoint") return fail(s, "no endpoint event");
    auto post_url = resolve(endpoint->data, resource_);
    if (!post_url) return fail(s, "unusable endpoint " + endpoint->data);

    int next_id = 1;
    auto call = [&](const std::string& method, json params) -> std::optional<json> {
      int id = next_id++;
      json msg = {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}};
      auto r = send("POST", *post_url, {{"Authorization", "Bearer " + t_.access_token}},
                    msg.dump(), "application/json");
      if (r.status == 200) return json::parse(r.body, nullptr, false);
      if (r.status != 202) return std::nullopt;
      while (auto f = stream->next(o_.step_timeout)) {
        auto j = json::parse(f->data, nullptr, false);
        if (j.is_object() && j.value("id", json()) == json(id)) return j;
      }
      return std::nullopt;
    };
    auto init = call("initialize", {{"protocolVersion", "2024-11-05"},
                                    {"capabilities", json::object()},
                                    {"clientInfo", {{"name", "testkit"}, {"version", "1"}}}});
    if (!init || !init->contains("result")) return fail(s, "initialize failed");
    send("POST", *post_url, {{"Authorization", "Bearer " + t_.access_token}},
         json{{"jsonrpc", "2.0"}, {"method", "notifications/initialized"}}.dump(),
         "application/json");
    auto list = call("tools/list", json::object());
    if (!list || !list->contains("result")) return fail(s, "tools/list failed");
    for (const auto& tool : (*list)["result"].value("tools", json::array())) {
      t_.tool_names.push_back(tool.value("name", ""));
    }
    auto result = call("tools/call", {{"name", o_.tool}, {"arguments", json::object()}});
    if (!result || !result->contains("result")) return fail(s, "tools/call failed");
    for (const auto& c : (*result)["result"].value("content", json::array())) {
      if (c.value("type", "") == "text") t_.tool_result += c.value("text", "");
    }
    return pass(s, "called " + o_.tool);
  }

  const ClientOptions& o_;
  Transcript t_;
  Url resource_, metadata_url_, authorize_, token_, register_, login_;
  std::string verifier_, state_, code_;
};

}  // namespace

Transcript run_client_flow(const ClientOptions& options) { return Flow(options).run(); }

}  // namespace mcpgw::testkit
