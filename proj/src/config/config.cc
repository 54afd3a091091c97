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

#include "mcpgw/config/config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <map>
#include <regex>
#include <set>

#include "mcpgw/common/fs.h"
#include "mcpgw/common/http.h"

namespace mcpgw::config {
namespace {

using nlohmann::json;

std::string at(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}
std::string idx(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

bool valid_host(std::string_view s) {
  auto n = normalize_host(s);
  return n && *n == s;
}

/// Field-by-field reader over one JSON object. Every key it was asked about
/// counts as known; finish() reports the rest.
class Obj {
 public:
  Obj(const json& j, std::string path, Diagnostics& d) : j_(j), path_(std::move(path)), d_(d) {
    if (!j_.is_object()) {
      d_.push_back({path_, "expected a mapping"});
      ok_ = false;
    }
  }

  std::string path(std::string_view key) const { return at(path_, key); }
  void error(std::string_view key, std::string msg) { d_.push_back({path(key), std::move(msg)}); }

  const json* get(std::string_view key) {
    used_.insert(std::string(key));
    if (!ok_) return nullptr;
    auto it = j_.find(std::string(key));
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json* require(std::string_view key) {
    auto* v = get(key);
    if (!v && ok_) error(key, "required");
    return v;
  }

  void str(std::string_view key, std::string& out, bool required = false) {
    auto* v = required ? require(key) : get(key);
    if (!v) return;
    if (!v->is_string()) return error(key, "expected a string");
    out = v->get<std::string>();
    if (required && out.empty()) error(key, "must not be empty");
  }

  template <typename Int>
  void integer(std::string_view key, Int& out, std::int64_t lo, std::int64_t hi) {
    auto* v = get(key);
    if (!v) return;
    if (!v->is_number_integer()) return error(key, "expected an integer");
    bool too_big = v->is_number_unsigned() && v->get<std::uint64_t>() > std::uint64_t(hi);
    auto n = v->get<std::int64_t>();
    if (too_big || n < lo || n > hi) {
      return error(key, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    }
    out = static_cast<Int>(n);
  }

  void number(std::string_view key, double& out) {
    auto* v = get(key);
    if (!v) return;
    if (!v->is_number()) return error(key, "expected a number");
    out = v->get<double>();
  }

  void boolean(std::string_view key, bool& out) {
    auto* v = get(key);
    if (!v) return;
    if (!v->is_boolean()) return error(key, "expected true or false");
    out = v->get<bool>();
  }

  void str_list(std::string_view key, std::vector<std::string>& out) {
    auto* v = get(key);
    if (!v) return;
    if (!v->is_array()) return error(key, "expected a list");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) {
        d_.push_back({idx(path(key), i), "expected a string"});
        continue;
      }
      out.push_back((*v)[i].get<std::string>());
    }
  }

  /// Calls fn(element, element_path) for each list element.
  template <typename Fn>
  void list(std::string_view key, Fn fn, bool required = false) {
    auto* v = required ? require(key) : get(key);
    if (!v) return;
    if (!v->is_array()) return error(key, "expected a list");
    for (std::size_t i = 0; i < v->size(); ++i) fn((*v)[i], idx(path(key), i));
  }

  void finish() {
    if (!ok_) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) d_.push_back({path(it.key()), "unknown field"});
    }
  }

 private:
  const json& j_;
  std::string path_;
  Diagnostics& d_;
  std::set<std::string> used_;
  bool ok_ = true;
};

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  static const std::regex int_re("[-+]?[0-9]+");
  static const std::regex float_re("[-+]?([0-9]+\\.[0-9]*|\\.[0-9]+|[0-9]+)([eE][-+]?[0-9]+)?");
  if (std::regex_match(s, int_re)) {
    std::string_view digits = s;
    if (digits.front() == '+') digits.remove_prefix(1);
    const char* end = digits.data() + digits.size();
    std::int64_t v = 0;
    if (auto r = std::from_chars(digits.data(), end, v); r.ec == std::errc() && r.ptr == end) {
      return v;
    }
    std::uint64_t u = 0;
    if (auto r = std::from_chars(digits.data(), end, u); r.ec == std::errc() && r.ptr == end) {
      return u;
    }
    return s;
  }
  if (std::regex_match(s, float_re)) return std::strtod(s.c_str(), nullptr);
  return s;
}

struct DuplicateKey {
  std::string key;
  int line;
};

json node_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null: return nullptr;
    case YAML::NodeType::Scalar: return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(node_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) {
        auto key = kv.first.Scalar();
        if (o.contains(key)) throw DuplicateKey{key, kv.first.Mark().line + 1};
        o[key] = node_to_json(kv.second);
      }
      return o;
    }
  }
  return nullptr;
}

bool check_key_hash(std::string_view h) {
  static const std::regex re("[0-9a-f]{32}\\$[0-9a-f]{64}");
  return std::regex_match(std::string(h), re);
}

EntryPoint entry_point_from_json(const json& j, const std::string& path, Diagnostics& d) {
  EntryPoint e;
  Obj o(j, path, d);
  o.str("name", e.name, true);
  o.str("address", e.address, true);
  if (auto* t = o.get("tls")) {
    Obj to(*t, o.path("tls"), d);
    TlsSettings tls;
    to.str("cert_file", tls.cert_file, true);
    to.str("key_file", tls.key_file, true);
    to.finish();
    e.tls = tls;
  }
  o.finish();
  return e;
}

AdminSettings admin_from_json(const json& j, const std::string& path, Diagnostics& d) {
  AdminSettings a;
  Obj o(j, path, d);
  o.str("address", a.address);
  o.str("ui_dir", a.ui_dir);
  o.list("keys", [&](const json& k, const std::string& kp) {
    AdminKey key;
    Obj ko(k, kp, d);
    ko.str("name", key.name, true);
    ko.str("key_hash", key.key_hash, true);
    std::string perm = "read";
    ko.str("permissions", perm);
    if (perm == "write") {
      key.permission = Permission::write;
    } else if (perm != "read") {
      ko.error("permissions", "expected read or write");
    }
    ko.finish();
    a.keys.push_back(key);
  });
  o.finish();
  return a;
}

OAuthConfig oauth_from_json(const json& j, const std::string& path, Diagnostics& d) {
  OAuthConfig c;
  Obj o(j, path, d);
  o.str("issuer_host", c.issuer_host, true);
  o.str("public_scheme", c.public_scheme);
  o.integer("public_port", c.public_port, 0, 65535);
  o.str_list("stub_idp_users", c.stub_idp_users);
  o.str_list("middleware_ids", c.middleware_ids);
  o.finish();
  return c;
}

}  // namespace

std::string format(const Diagnostic& d) {
  return d.path.empty() ? d.message : d.path + ": " + d.message;
}

const char* to_string(Permission p) { return p == Permission::write ? "write" : "read"; }

std::optional<ListenAddress> parse_listen_address(std::string_view s) {
  std::string_view host;
  std::string_view port;
  if (s.starts_with("[")) {
    auto close = s.find(']');
    if (close == std::string_view::npos || close + 1 >= s.size() || s[close + 1] != ':') {
      return std::nullopt;
    }
    host = s.substr(1, close - 1);
    port = s.substr(close + 2);
  } else {
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    host = s.substr(0, colon);
    port = s.substr(colon + 1);
    if (host.find(':') != std::string_view::npos) return std::nullopt;
  }
  if (host.empty() || port.empty()) return std::nullopt;
  int p = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
  if (ec != std::errc() || end != port.data() + port.size() || p < 0 || p > 65535) {
    return std::nullopt;
  }
  return ListenAddress{std::string(host), p};
}

const char* type_name(const MiddlewareKind& k) {
  switch (k.index()) {
    case 0: return "forward_auth";
    case 1: return "redirect_wellknown";
    case 2: return "rate_limit";
    case 3: return "ban_check";
    default: return "inspect";
  }
}

std::variant<json, Diagnostic> yaml_to_json(std::string_view yaml_text) {
  try {
    auto root = YAML::Load(std::string(yaml_text));
    return node_to_json(root);
  } catch (const YAML::Exception& e) {
    return Diagnostic{"", "line " + std::to_string(e.mark.line + 1) + ", column " +
                              std::to_string(e.mark.column + 1) + ": " + e.msg};
  } catch (const DuplicateKey& e) {
    return Diagnostic{"", "line " + std::to_string(e.line) + ": duplicate key '" + e.key + "'"};
  }
}

std::optional<RouteConfig> route_from_json(const json& j, const std::string& path,
                                           Diagnostics& d) {
  auto before = d.size();
  RouteConfig r;
  Obj o(j, path, d);
  o.str("id", r.id, true);
  o.str("host_rule", r.host_rule, true);
  o.str("path_prefix", r.path_prefix);
  o.str_list("entry_points", r.entry_points);
  o.str_list("middleware_ids", r.middleware_ids);
  o.str("backend_id", r.backend_id, true);
  o.boolean("tls_required", r.tls_required);
  o.integer("version", r.version, 1, std::numeric_limits<std::int64_t>::max());
  o.finish();
  if (d.size() != before) return std::nullopt;
  return r;
}

std::optional<BackendServer> backend_from_json(const json& j, const std::string& path,
                                               Diagnostics& d) {
  auto before = d.size();
  BackendServer b;
  Obj o(j, path, d);
  o.str("id", b.id, true);
  o.str("display_name", b.display_name);
  o.str("upstream_url", b.upstream_url, true);
  o.str("transport", b.transport);
  if (o.get("onboarded_at_ms")) {
    std::int64_t ms = 0;
    o.integer("onboarded_at_ms", ms, 0, std::numeric_limits<std::int64_t>::max());
    b.onboarded_at_ms = ms;
  }
  o.finish();
  if (d.size() != before) return std::nullopt;
  return b;
}

std::optional<MiddlewareSpec> middleware_from_json(const json& j, const std::string& path,
                                                   Diagnostics& d) {
  auto before = d.size();
  MiddlewareSpec m;
  Obj o(j, path, d);
  o.str("id", m.id, true);
  std::string type;
  o.str("type", type, true);
  if (type == "forward_auth") {
    ForwardAuthSpec s;
    o.str("address", s.address);
    o.str_list("auth_response_headers", s.auth_response_headers);
    m.kind = s;
  } else if (type == "redirect_wellknown") {
    RedirectWellknownSpec s;
    o.str("oauth_host", s.oauth_host);
    o.boolean("permanent", s.permanent);
    m.kind = s;
  } else if (type == "rate_limit") {
    RateLimitMiddlewareSpec s;
    std::string key = "peer_ip";
    o.str("key_by", key);
    if (auto k = policy::parse_rate_key(key)) {
      s.limit.key_by = *k;
    } else {
      o.error("key_by", "expected peer_ip, client_id or subject");
    }
    o.number("rate", s.limit.rate);
    o.integer("burst", s.limit.burst, 1, 1'000'000);
    if (!(s.limit.rate > 0.0)) o.error("rate", "must be positive");
    m.kind = s;
  } else if (type == "ban_check") {
    m.kind = BanCheckSpec{};
  } else if (type == "inspect") {
    InspectSpec s;
    o.str_list("rules", s.rules);
    o.boolean("inspect_responses", s.inspect_responses);
    m.kind = s;
  } else if (!type.empty()) {
    o.error("type", "unknown middleware type '" + type +
                        "' (expected forward_auth, redirect_wellknown, rate_limit, ban_check "
                        "or inspect)");
  }
  o.finish();
  if (d.size() != before) return std::nullopt;
  return m;
}

std::optional<inspect::ThreatRuleSpec> rule_from_json(const json& j, const std::string& path,
                                                      Diagnostics& d) {
  auto before = d.size();
  inspect::ThreatRuleSpec r;
  Obj o(j, path, d);
  o.str("id", r.id, true);
  // Built-in overrides start from the built-in defaults.
  for (const auto& b : inspect::builtin_rules()) {
    if (b.id == r.id) r = b;
  }
  auto enum_field = [&](std::string_view key, auto parse, auto& out, std::string_view expected) {
    std::string s;
    o.str(key, s);
    if (s.empty()) return;
    if (auto v = parse(s)) {
      out = *v;
    } else {
      o.error(key, "expected " + std::string(expected));
    }
  };
  enum_field("target", inspect::parse_rule_target, r.target,
             "message, tool_description or traffic");
  enum_field("pattern_kind", inspect::parse_pattern_kind, r.pattern_kind,
             "literal, iliteral, regex or iregex");
  o.str("pattern", r.pattern);
  enum_field("severity", inspect::parse_severity, r.severity, "low, medium or high");
  enum_field("action", inspect::parse_action, r.action, "log, deny or ban");
  std::int64_t ttl = r.ban_ttl.count();
  o.integer("ban_ttl", ttl, 0, 10LL * 365 * 24 * 3600);
  r.ban_ttl = std::chrono::seconds(ttl);
  std::string target;
  o.str("ban_target", target);
  if (target == "client_id") {
    r.ban_target = inspect::BanTarget::client_id;
  } else if (target == "peer_ip") {
    r.ban_target = inspect::BanTarget::peer_ip;
  } else if (!target.empty()) {
    o.error("ban_target", "expected peer_ip or client_id");
  }
  o.finish();
  if (d.size() != before) return std::nullopt;
  return r;
}

std::variant<GatewayConfig, Diagnostics> parse_config(std::string_view yaml_text) {
  auto root = yaml_to_json(yaml_text);
  if (auto* diag = std::get_if<Diagnostic>(&root)) return Diagnostics{*diag};
  auto& doc = std::get<json>(root);
  if (doc.is_null()) doc = json::object();

  Diagnostics d;
  GatewayConfig c;
  Obj top(doc, "", d);
  top.list(
      "entry_points",
      [&](const json& j, const std::string& p) {
        c.entry_points.push_back(entry_point_from_json(j, p, d));
      },
      true);
  if (auto* a = top.get("admin")) c.admin = admin_from_json(*a, "admin", d);
  if (auto* a = top.require("oauth")) c.oauth = oauth_from_json(*a, "oauth", d);
  top.str("state_dir", c.state_dir);
  if (auto* a = top.get("audit")) {
    Obj o(*a, "audit", d);
    o.str("path", c.audit.path);
    o.integer("max_segment_bytes", c.audit.max_segment_bytes, 0,
              std::numeric_limits<std::int64_t>::max());
    o.finish();
  }
  if (auto* a = top.get("limits")) {
    Obj o(*a, "limits", d);
    o.integer("max_sse_per_peer", c.limits.max_sse_per_peer, 1, 1'000'000);
    o.integer("max_body_bytes", c.limits.max_body_bytes, 1, 1LL << 30);
    o.integer("upstream_connect_timeout_ms", c.limits.upstream_connect_timeout_ms, 1, 600'000);
    o.integer("upstream_read_timeout_ms", c.limits.upstream_read_timeout_ms, 1,
              std::numeric_limits<int>::max());
    o.integer("operator_ban_ttl_s", c.limits.operator_ban_ttl_s, 1,
              std::numeric_limits<int>::max());
    o.finish();
  }
  top.list("routers", [&](const json& j, const std::string& p) {
    if (auto r = route_from_json(j, p, d)) c.routers.push_back(*r);
  });
  top.list("middlewares", [&](const json& j, const std::string& p) {
    if (auto m = middleware_from_json(j, p, d)) c.middlewares.push_back(*m);
  });
  top.list("rules", [&](const json& j, const std::string& p) {
    if (auto r = rule_from_json(j, p, d)) c.rules.push_back(*r);
  });
  top.list("backends", [&](const json& j, const std::string& p) {
    if (auto b = backend_from_json(j, p, d)) c.backends.push_back(*b);
  });
  top.finish();
  if (!d.empty()) return d;
  return c;
}

Diagnostics validate(const GatewayConfig& c) {
  Diagnostics d;
  auto diag = [&](std::string path, std::string msg) {
    d.push_back({std::move(path), std::move(msg)});
  };

  if (c.entry_points.empty()) diag("entry_points", "required");
  std::map<std::string, std::size_t> ep_names;
  std::map<int, std::string> ports;
  for (std::size_t i = 0; i < c.entry_points.size(); ++i) {
    const auto& e = c.entry_points[i];
    auto p = idx("entry_points", i);
    if (!ep_names.emplace(e.name, i).second) {
      diag(p + ".name", "duplicate entry point '" + e.name + "'");
    }
    auto addr = parse_listen_address(e.address);
    if (!addr) {
      diag(p + ".address", "expected host:port");
    } else if (addr->port != 0 && !ports.emplace(addr->port, e.name).second) {
      diag(p + ".address", "port " + std::to_string(addr->port) +
                               " already used by entry point '" + ports[addr->port] + "'");
    }
  }

  if (!c.admin.address.empty()) {
    auto addr = parse_listen_address(c.admin.address);
    if (!addr) {
      diag("admin.address", "expected host:port");
    } else if (addr->port != 0 && ports.count(addr->port)) {
      diag("admin.address", "admin listener must not share port " +
                                std::to_string(addr->port) + " with entry point '" +
                                ports[addr->port] + "'");
    }
    if (c.admin.keys.empty()) diag("admin.keys", "at least one key is required");
  }
  std::set<std::string> key_names;
  for (std::size_t i = 0; i < c.admin.keys.size(); ++i) {
    const auto& k = c.admin.keys[i];
    auto p = idx("admin.keys", i);
    if (!key_names.insert(k.name).second) diag(p + ".name", "duplicate key name '" + k.name + "'");
    if (!check_key_hash(k.key_hash)) {
      diag(p + ".key_hash", "expected a salted hash from 'mcpgw hash-admin-key'");
    }
  }

  std::set<std::string> mw_ids;
  std::set<std::string> rule_ids;
  for (const auto& b : inspect::builtin_rules()) rule_ids.insert(b.id);
  for (const auto& r : c.rules) rule_ids.insert(r.id);
  for (std::size_t i = 0; i < c.middlewares.size(); ++i) {
    const auto& m = c.middlewares[i];
    auto p = idx("middlewares", i);
    if (m.id.empty()) diag(p + ".id", "must not be empty");
    if (!mw_ids.insert(m.id).second) diag(p + ".id", "duplicate middleware id '" + m.id + "'");
    if (auto* fa = std::get_if<ForwardAuthSpec>(&m.kind)) {
      if (!fa->address.empty()) {
        auto u = parse_url(fa->address);
        if (!u || (u->scheme != "http" && u->scheme != "https")) {
          diag(p + ".address", "expected an absolute http(s) URL");
        }
      }
    } else if (auto* rw = std::get_if<RedirectWellknownSpec>(&m.kind)) {
      if (!rw->oauth_host.empty() && !valid_host(rw->oauth_host)) {
        diag(p + ".oauth_host", "expected a lowercase host name without port");
      }
    } else if (auto* rl = std::get_if<RateLimitMiddlewareSpec>(&m.kind)) {
      if (!rl->limit.valid()) diag(p, "rate must be positive and burst at least 1");
    } else if (auto* in = std::get_if<InspectSpec>(&m.kind)) {
      for (std::size_t k = 0; k < in->rules.size(); ++k) {
        if (!rule_ids.count(in->rules[k])) {
          diag(idx(p + ".rules", k), "unknown rule '" + in->rules[k] + "'");
        }
      }
    }
  }

  if (!valid_host(c.oauth.issuer_host)) {
    diag("oauth.issuer_host", "expected a lowercase host name without port");
  }
  if (c.oauth.public_scheme != "https" && c.oauth.public_scheme != "http") {
    diag("oauth.public_scheme", "expected http or https");
  }
  if (c.oauth.stub_idp_users.empty()) {
    diag("oauth.stub_idp_users", "at least one user is required");
  }
  for (std::size_t i = 0; i < c.oauth.middleware_ids.size(); ++i) {
    if (!mw_ids.count(c.oauth.middleware_ids[i])) {
      diag(idx("oauth.middleware_ids", i),
           "unknown middleware '" + c.oauth.middleware_ids[i] + "'");
    }
  }

  std::set<std::string> backend_ids;
  for (std::size_t i = 0; i < c.backends.size(); ++i) {
    const auto& b = c.backends[i];
    auto p = idx("backends", i);
    if (!backend_ids.insert(b.id).second) diag(p + ".id", "duplicate backend id '" + b.id + "'");
    auto u = parse_url(b.upstream_url);
    if (!u || (u->scheme != "http" && u->scheme != "https")) {
      diag(p + ".upstream_url", "expected an absolute http(s) URL");
    } else if (!u->userinfo.empty()) {
      diag(p + ".upstream_url", "must not carry credentials");
    }
    if (b.transport != "sse") diag(p + ".transport", "only 'sse' is supported");
  }

  std::set<std::string> route_ids;
  std::set<std::pair<std::string, std::string>> bindings;
  for (std::size_t i = 0; i < c.routers.size(); ++i) {
    const auto& r = c.routers[i];
    auto p = idx("routers", i);
    if (!route_ids.insert(r.id).second) diag(p + ".id", "duplicate router id '" + r.id + "'");
    if (!valid_host(r.host_rule)) {
      diag(p + ".host_rule", "expected a lowercase host name without port");
    } else if (r.host_rule == c.oauth.issuer_host) {
      diag(p + ".host_rule", "collides with oauth.issuer_host");
    }
    auto norm = normalize_path(r.path_prefix);
    if (!norm || *norm != r.path_prefix) {
      diag(p + ".path_prefix", "expected a normalized absolute path");
    }
    if (!bindings.emplace(r.host_rule, r.path_prefix).second) {
      diag(p + ".host_rule", "route for host '" + r.host_rule + "' and prefix '" +
                                 r.path_prefix + "' already exists");
    }
    for (std::size_t k = 0; k < r.middleware_ids.size(); ++k) {
      if (!mw_ids.count(r.middleware_ids[k])) {
        diag(idx(p + ".middleware_ids", k), "unknown middleware '" + r.middleware_ids[k] + "'");
      }
    }
    if (!backend_ids.count(r.backend_id)) {
      diag(p + ".backend_id", "unknown backend '" + r.backend_id + "'");
    }
    bool tls_reachable = false;
    for (std::size_t k = 0; k < r.entry_points.size(); ++k) {
      auto it = ep_names.find(r.entry_points[k]);
      if (it == ep_names.end()) {
        diag(idx(p + ".entry_points", k), "unknown entry point '" + r.entry_points[k] + "'");
      } else if (c.entry_points[it->second].tls) {
        tls_reachable = true;
      }
    }
    if (r.entry_points.empty()) {
      for (const auto& e : c.entry_points) tls_reachable |= e.tls.has_value();
    }
    if (r.tls_required && !tls_reachable) {
      diag(p + ".tls_required", "no TLS entry point serves this route");
    }
  }

  auto compiled = inspect::RuleSet::compile(c.rules, "rules");
  if (auto* rd = std::get_if<std::vector<inspect::RuleDiagnostic>>(&compiled)) {
    for (const auto& x : *rd) diag(x.path, x.message);
  }
  return d;
}

std::variant<SnapshotPtr, Diagnostics> ConfigSnapshot::build(GatewayConfig config,
                                                             std::uint64_t generation) {
  auto d = validate(config);
  if (!d.empty()) return d;
  auto compiled = inspect::RuleSet::compile(config.rules, "rules");
  return SnapshotPtr(new ConfigSnapshot(
      std::move(config), std::get<inspect::RuleSet>(std::move(compiled)), generation));
}

const RouteConfig* ConfigSnapshot::find_route(std::string_view id) const {
  for (const auto& r : config_.routers) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const BackendServer* ConfigSnapshot::find_backend(std::string_view id) const {
  for (const auto& b : config_.backends) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

const MiddlewareSpec* ConfigSnapshot::find_middleware(std::string_view id) const {
  for (const auto& m : config_.middlewares) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

const EntryPoint* ConfigSnapshot::find_entry_point(std::string_view name) const {
  for (const auto& e : config_.entry_points) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool ConfigSnapshot::is_route_host(std::string_view host) const {
  return std::any_of(config_.routers.begin(), config_.routers.end(),
                     [&](const RouteConfig& r) { return r.host_rule == host; });
}

EnvLookup process_env() {
  return [](std::string_view name) -> std::optional<std::string> {
    const char* v = std::getenv(std::string(name).c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env_overrides(GatewayConfig& c, const EnvLookup& env) {
  if (!env) return;
  if (auto v = env("MCPGW_ISSUER_HOST")) c.oauth.issuer_host = *v;
  if (auto v = env("MCPGW_ADMIN_ADDRESS")) c.admin.address = *v;
  for (auto& e : c.entry_points) {
    std::string name = "MCPGW_ENTRYPOINT_";
    for (char ch : e.name) {
      name.push_back(ch == '-' ? '_'
                               : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    name += "_ADDRESS";
    if (auto v = env(name)) e.address = *v;
  }
}

std::variant<SnapshotPtr, Diagnostics> load_config(std::string_view yaml_text,
                                                   const EnvLookup& env) {
  auto parsed = parse_config(yaml_text);
  if (auto* d = std::get_if<Diagnostics>(&parsed)) return *d;
  auto& c = std::get<GatewayConfig>(parsed);
  apply_env_overrides(c, env);
  return ConfigSnapshot::build(std::move(c));
}

std::variant<SnapshotPtr, Diagnostics> load_config_file(const std::filesystem::path& path,
                                                        const EnvLookup& env) {
  auto text = read_text_file(path);
  if (!text) {
    return Diagnostics{{"", "cannot read config file '" + path.string() + "': file not found"}};
  }
  auto parsed = parse_config(*text);
  if (auto* d = std::get_if<Diagnostics>(&parsed)) return *d;
  auto& c = std::get<GatewayConfig>(parsed);
  apply_env_overrides(c, env);
  auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) {
      p = (base / p).lexically_normal().string();
    }
  };
  resolve(c.state_dir);
  resolve(c.audit.path);
  resolve(c.admin.ui_dir);
  for (auto& e : c.entry_points) {
    if (e.tls) {
      resolve(e.tls->cert_file);
      resolve(e.tls->key_file);
    }
  }
  return ConfigSnapshot::build(std::move(c));
}

json to_json(const RouteConfig& r) {
  return {{"id", r.id},
          {"host_rule", r.host_rule},
          {"path_prefix", r.path_prefix},
          {"entry_points", r.entry_points},
          {"middleware_ids", r.middleware_ids},
          {"backend_id", r.backend_id},
          {"tls_required", r.tls_required},
          {"version", r.version}};
}

json to_json(const BackendServer& b) {
  json j = {{"id", b.id},
            {"display_name", b.display_name},
            {"upstream_url", b.upstream_url},
            {"transport", b.transport}};
  if (b.onboarded_at_ms) j["onboarded_at_ms"] = *b.onboarded_at_ms;
  return j;
}

json to_json(const MiddlewareSpec& m) {
  json j = {{"id", m.id}, {"type", type_name(m.kind)}};
  if (auto* fa = std::get_if<ForwardAuthSpec>(&m.kind)) {
    j["address"] = fa->address;
    j["auth_response_headers"] = fa->auth_response_headers;
  } else if (auto* rw = std::get_if<RedirectWellknownSpec>(&m.kind)) {
    j["oauth_host"] = rw->oauth_host;
    j["permanent"] = rw->permanent;
  } else if (auto* rl = std::get_if<RateLimitMiddlewareSpec>(&m.kind)) {
    j["key_by"] = policy::to_string(rl->limit.key_by);
    j["rate"] = rl->limit.rate;
    j["burst"] = rl->limit.burst;
  } else if (auto* in = std::get_if<InspectSpec>(&m.kind)) {
    j["rules"] = in->rules;
    j["inspect_responses"] = in->inspect_responses;
  }
  return j;
}

json to_json(const inspect::ThreatRuleSpec& r) {
  json j = {{"id", r.id},
            {"target", inspect::to_string(r.target)},
            {"severity", inspect::to_string(r.severity)},
            {"action", inspect::to_string(r.action)},
            {"ban_ttl", r.ban_ttl.count()},
            {"ban_target",
             r.ban_target == inspect::BanTarget::client_id ? "client_id" : "peer_ip"}};
  // Built-ins keep their reserved detector pattern implicitly.
  if (!r.id.starts_with(inspect::kBuiltinPrefix)) {
    j["pattern_kind"] = inspect::to_string(r.pattern_kind);
    j["pattern"] = r.pattern;
  }
  return j;
}

json to_json(const GatewayConfig& c) {
  json j = json::object();
  j["entry_points"] = json::array();
  for (const auto& e : c.entry_points) {
    json ej = {{"name", e.name}, {"address", e.address}};
    if (e.tls) ej["tls"] = {{"cert_file", e.tls->cert_file}, {"key_file", e.tls->key_file}};
    j["entry_points"].push_back(ej);
  }
  json keys = json::array();
  for (const auto& k : c.admin.keys) {
    keys.push_back(
        {{"name", k.name}, {"key_hash", k.key_hash}, {"permissions", to_string(k.permission)}});
  }
  j["admin"] = {{"address", c.admin.address}, {"keys", keys}, {"ui_dir", c.admin.ui_dir}};
  j["oauth"] = {{"issuer_host", c.oauth.issuer_host},
                {"public_scheme", c.oauth.public_scheme},
                {"public_port", c.oauth.public_port},
                {"stub_idp_users", c.oauth.stub_idp_users},
                {"middleware_ids", c.oauth.middleware_ids}};
  j["state_dir"] = c.state_dir;
  j["audit"] = {{"path", c.audit.path}, {"max_segment_bytes", c.audit.max_segment_bytes}};
  j["limits"] = {{"max_sse_per_peer", c.limits.max_sse_per_peer},
                 {"max_body_bytes", c.limits.max_body_bytes},
                 {"upstream_connect_timeout_ms", c.limits.upstream_connect_timeout_ms},
                 {"upstream_read_timeout_ms", c.limits.upstream_read_timeout_ms},
                 {"operator_ban_ttl_s", c.limits.operator_ban_ttl_s}};
  auto list = [](const auto& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(to_json(x));
    return a;
  };
  j["routers"] = list(c.routers);
  j["middlewares"] = list(c.middlewares);
  j["rules"] = list(c.rules);
  j["backends"] = list(c.backends);
  return j;
}

std::string serialize(const GatewayConfig& c) { return to_json(c).dump(2); }

}  // namespace mcpgw::config
