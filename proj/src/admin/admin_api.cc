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

#include "mcpgw/admin/admin_api.h"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <regex>
#include <sstream>

#include "mcpgw/common/crypto.h"
#include "mcpgw/config/registry.h"

namespace mcpgw::admin {

using nlohmann::json;

namespace {

constexpr auto kTailWait = std::chrono::milliseconds(250);
constexpr auto kKeepalive = std::chrono::seconds(15);

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_header("Cache-Control", "no-store");
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error,
                std::string_view message, const config::Diagnostics& diags = {}) {
  json j = {{"error", error}, {"message", message}};
  if (!diags.empty()) {
    json list = json::array();
    for (const auto& d : diags) list.push_back({{"path", d.path}, {"message", d.message}});
    j["diagnostics"] = std::move(list);
  }
  send_json(res, status, j);
}

void send_registry_error(httplib::Response& res, const config::RegistryError& e) {
  using K = config::RegistryError::Kind;
  switch (e.kind) {
    case K::invalid: return send_error(res, 400, "invalid", "rejected by validation", e.diagnostics);
    case K::not_found: return send_error(res, 404, "not_found", "no such object", e.diagnostics);
    case K::conflict: return send_error(res, 409, "conflict", "conflicts with live state", e.diagnostics);
    case K::io: return send_error(res, 500, "io", "could not persist the change", e.diagnostics);
  }
}

/// Accepts only plain decimal; anything else falls back to `dflt`.
std::size_t size_param(const httplib::Request& req, const char* name, std::size_t dflt,
                       std::size_t max) {
  if (!req.has_param(name)) return dflt;
  auto v = req.get_param_value(name);
  std::size_t n = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc{} || p != v.data() + v.size()) return dflt;
  return std::min(n, max);
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    send_error(res, 400, "invalid", "body must be a JSON object");
    return std::nullopt;
  }
  return j;
}

const char* content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

/// Records seen by one audit tail subscriber. Bounded; a reader that falls
/// this far behind is disconnected and expected to reconnect.
struct TailQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<audit::AuditRecord> records;
  bool overflow = false;
};

}  // namespace

const config::AdminKey* authenticate(const std::vector<config::AdminKey>& keys,
                                     std::string_view presented) {
  if (presented.empty()) return nullptr;
  const config::AdminKey* found = nullptr;
  for (const auto& k : keys) {
    if (crypto::verify_api_key(presented, k.key_hash) && !found) found = &k;
  }
  return found;
}

json to_json(const policy::BanEntry& b) {
  return {{"id", b.id},
          {"target", b.target},
          {"reason", b.reason},
          {"source", policy::to_string(b.source)},
          {"created_at_ms", to_unix_millis(b.created_at)},
          {"expires_at_ms", to_unix_millis(b.expires_at)}};
}

json to_json(const inspect::DetectionEvent& e) {
  json j = {{"rule_id", e.rule_id},
            {"severity", inspect::to_string(e.severity)},
            {"action_taken", inspect::to_string(e.action_taken)},
            {"peer_ip", e.peer_ip},
            {"client_id", nullptr},
            {"excerpt", e.excerpt},
            {"observed_at_ms", to_unix_millis(e.observed_at)}};
  if (e.client_id) j["client_id"] = *e.client_id;
  return j;
}

json to_json(const BackendHealth& h) {
  json j = {{"state", to_string(h.state)}, {"since_ms", nullptr}, {"last_probe_ms", nullptr}};
  if (h.since) j["since_ms"] = to_unix_millis(*h.since);
  if (h.last_probe) j["last_probe_ms"] = to_unix_millis(*h.last_probe);
  return j;
}

std::string audit_frame(const audit::AuditRecord& r) {
  return "id: " + std::to_string(r.seq) + "\nevent: audit\ndata: " + audit::serialize_line(r) +
         "\n\n";
}

struct AdminApi::Call {
  const httplib::Request& req;
  httplib::Response& res;
  const config::AdminKey& key;
};

AdminApi::AdminApi(gateway::Runtime& runtime, config::AdminSettings settings)
    : rt_(runtime), settings_(std::move(settings)) {}

AdminApi::~AdminApi() { shutdown(); }

void AdminApi::shutdown() {
  stopping_->store(true);
  std::vector<std::thread> joining;
  {
    std::lock_guard lock(probes_mu_);
    joining.swap(probes_);
  }
  for (auto& t : joining) t.join();
}

void AdminApi::handle(const httplib::Request& req, httplib::Response& res) {
  const std::string& path = req.path;
  if (path == "/admin/ui" || path.starts_with("/admin/ui/")) {
    if (req.method != "GET") return send_error(res, 405, "method_not_allowed", "GET only");
    if (!serve_ui(req, res)) send_error(res, 404, "not_found", "no such file");
    return;
  }

  const auto* key = authenticate(settings_.keys, req.get_header_value(kKeyHeader));
  if (!key) {
    res.set_header("WWW-Authenticate", "X-Admin-Key");
    return send_error(res, 401, "unauthenticated", "missing or invalid X-Admin-Key");
  }

  struct Endpoint {
    std::regex pattern;
    std::string method;
    bool write;
    std::function<void(AdminApi&, Call&, const std::smatch&)> fn;
  };
  static const std::vector<Endpoint> table = [] {
    std::vector<Endpoint> t;
    auto add = [&](const char* re, const char* m, bool w, auto fn) {
      t.push_back({std::regex(re), m, w, fn});
    };
    add("/admin/servers", "GET", false, [](AdminApi& a, Call& c, auto&) { a.list_servers(c); });
    add("/admin/servers", "POST", true, [](AdminApi& a, Call& c, auto&) { a.onboard_server(c); });
    add("/admin/routes", "GET", false, [](AdminApi& a, Call& c, auto&) { a.list_routes(c); });
    add("/admin/routes/([^/]+)/middlewares", "PUT", true,
        [](AdminApi& a, Call& c, const std::smatch& m) { a.set_route_middlewares(c, m[1]); });
    add("/admin/detections", "GET", false,
        [](AdminApi& a, Call& c, auto&) { a.list_detections(c); });
    add("/admin/bans", "GET", false, [](AdminApi& a, Call& c, auto&) { a.list_bans(c); });
    add("/admin/bans", "POST", true, [](AdminApi& a, Call& c, auto&) { a.create_ban(c); });
    add("/admin/bans/([^/]+)", "DELETE", true,
        [](AdminApi& a, Call& c, const std::smatch& m) { a.delete_ban(c, m[1]); });
    add("/admin/audit/tail", "GET", false, [](AdminApi& a, Call& c, auto&) { a.audit_tail(c); });
    add("/admin/health", "GET", false, [](AdminApi& a, Call& c, auto&) { a.health(c); });
    return t;
  }();

  std::vector<std::string> allowed;
  for (const auto& e : table) {
    std::smatch m;
    if (!std::regex_match(path, m, e.pattern)) continue;
    if (e.method != req.method) {
      allowed.push_back(e.method);
      continue;
    }
    if (e.write && key->permission != config::Permission::write) {
      return send_error(res, 403, "forbidden", "key '" + key->name + "' is read-only");
    }
    if (e.write && !rt_.audit().healthy()) {
      // A write that could not be recorded must not happen.
      return send_error(res, 503, "audit_unavailable", "audit log is not accepting records");
    }
    Call c{req, res, *key};
    e.fn(*this, c, m);
    return;
  }
  if (!allowed.empty()) {
    std::string allow;
    for (const auto& m : allowed) allow += (allow.empty() ? "" : ", ") + m;
    res.set_header("Allow", allow);
    return send_error(res, 405, "method_not_allowed", "allowed: " + allow);
  }
  send_error(res, 404, "not_found", "no admin endpoint at " + path);
}

void AdminApi::list_servers(Call& c) {
  auto snap = rt_.registry().current();
  json servers = json::array();
  for (const auto& b : snap->config().backends) {
    auto j = config::to_json(b);
    j["health"] = to_json(rt_.registry().health().get(b.id));
    json routes = json::array();
    for (const auto& r : snap->config().routers) {
      if (r.backend_id == b.id) routes.push_back(r.id);
    }
    j["route_ids"] = std::move(routes);
    servers.push_back(std::move(j));
  }
  send_json(c.res, 200, {{"servers", servers}, {"generation", snap->generation()}});
}

void AdminApi::onboard_server(Call& c) {
  auto body = parse_body(c.req, c.res);
  if (!body) return;
  config::Diagnostics diags;
  auto desc = config::descriptor_from_json(*body, diags);
  if (!desc) return send_error(c.res, 400, "invalid", "descriptor rejected", diags);
  auto out = rt_.registry().onboard(*desc, c.key.name);
  if (auto* e = std::get_if<config::RegistryError>(&out)) return send_registry_error(c.res, *e);
  auto& done = std::get<config::OnboardResult>(out);
  probe_later(done.backend);
  auto j = config::to_json(done.backend);
  j["health"] = to_json(rt_.registry().health().get(done.backend.id));
  j["route_ids"] = json::array({done.route.id});
  send_json(c.res, 201, j);
}

void AdminApi::list_routes(Call& c) {
  auto snap = rt_.registry().current();
  json routes = json::array();
  for (const auto& r : snap->config().routers) routes.push_back(config::to_json(r));
  json middlewares = json::array();
  for (const auto& m : snap->config().middlewares) middlewares.push_back(config::to_json(m));
  send_json(c.res, 200,
            {{"routes", routes}, {"middlewares", middlewares}, {"generation", snap->generation()}});
}

void AdminApi::set_route_middlewares(Call& c, const std::string& route_id) {
  auto body = parse_body(c.req, c.res);
  if (!body) return;
  config::Diagnostics diags;
  std::vector<std::string> ids;
  auto mids = body->find("middleware_ids");
  if (mids == body->end() || !mids->is_array()) {
    diags.push_back({"middleware_ids", "expected a list of middleware ids"});
  } else {
    for (std::size_t i = 0; i < mids->size(); ++i) {
      if (!(*mids)[i].is_string()) {
        diags.push_back({"middleware_ids[" + std::to_string(i) + "]", "expected a string"});
      } else {
        ids.push_back((*mids)[i].get<std::string>());
      }
    }
  }
  std::optional<std::uint64_t> version;
  if (auto v = body->find("version"); v != body->end() && !v->is_null()) {
    if (!v->is_number_unsigned()) {
      diags.push_back({"version", "expected a non-negative integer"});
    } else {
      version = v->get<std::uint64_t>();
    }
  }
  if (!diags.empty()) return send_error(c.res, 400, "invalid", "body rejected", diags);
  auto out = rt_.registry().set_route_middlewares(route_id, ids, version, c.key.name);
  if (auto* e = std::get_if<config::RegistryError>(&out)) return send_registry_error(c.res, *e);
  send_json(c.res, 200, config::to_json(std::get<RouteConfig>(out)));
}

void AdminApi::list_detections(Call& c) {
  auto limit = size_param(c.req, "limit", 100, kMaxDetections);
  json list = json::array();
  for (const auto& e : rt_.detections().recent(limit)) list.push_back(to_json(e));
  send_json(c.res, 200, {{"detections", list}, {"total", rt_.detections().total()}});
}

void AdminApi::list_bans(Call& c) {
  bool all = c.req.get_param_value("include_expired") == "true";
  json list = json::array();
  for (const auto& b : rt_.bans().list(rt_.clock().wall_now(), all)) list.push_back(to_json(b));
  send_json(c.res, 200, {{"bans", list}});
}

void AdminApi::create_ban(Call& c) {
  auto body = parse_body(c.req, c.res);
  if (!body) return;
  config::Diagnostics diags;
  std::string target, reason = "operator ban";
  std::int64_t ttl_s = rt_.registry().current()->config().limits.operator_ban_ttl_s;
  auto t = body->find("target");
  if (t == body->end() || !t->is_string() || t->get<std::string>().empty()) {
    diags.push_back({"target", "expected a peer IP or client_id"});
  } else {
    target = t->get<std::string>();
  }
  if (auto r = body->find("reason"); r != body->end()) {
    if (!r->is_string()) diags.push_back({"reason", "expected a string"});
    else reason = r->get<std::string>();
  }
  if (auto s = body->find("ttl_s"); s != body->end()) {
    if (!s->is_number_integer() || s->get<std::int64_t>() <= 0) {
      diags.push_back({"ttl_s", "expected a positive integer"});
    } else {
      ttl_s = s->get<std::int64_t>();
    }
  }
  if (!diags.empty()) return send_error(c.res, 400, "invalid", "body rejected", diags);
  policy::BanEntry e;
  e.target = target;
  e.reason = reason;
  e.source = policy::BanSource::operator_;
  e.created_at = rt_.clock().wall_now();
  e.expires_at = e.created_at + std::chrono::seconds(ttl_s);
  send_json(c.res, 201, to_json(rt_.bans().apply(std::move(e))));
}

void AdminApi::delete_ban(Call& c, const std::string& ban_id) {
  if (!rt_.bans().lift(ban_id, c.key.name)) {
    return send_error(c.res, 404, "not_found", "no ban '" + ban_id + "'");
  }
  c.res.status = 204;
}

void AdminApi::audit_tail(Call& c) {
  auto n = size_param(c.req, "n", kDefaultTail, kMaxTail);
  auto queue = std::make_shared<TailQueue>();
  auto* log = &rt_.audit();
  // Subscribe before reading the tail so nothing falls between the two;
  // duplicates are dropped by seq below.
  auto sub = log->subscribe([queue](const audit::AuditRecord& r) {
    std::lock_guard lock(queue->mu);
    if (queue->records.size() >= kMaxTail) {
      queue->overflow = true;
    } else {
      queue->records.push_back(r);
    }
    queue->cv.notify_all();
  });
  auto initial = std::make_shared<std::string>();
  auto next_seq = std::make_shared<std::uint64_t>(0);
  for (const auto& r : log->tail(n)) {
    *initial += audit_frame(r);
    *next_seq = r.seq + 1;
  }
  if (initial->empty()) *next_seq = log->next_seq();
  auto last_write = std::make_shared<MonoTime>(rt_.clock().mono_now());
  auto stopping = stopping_;
  const Clock* clock = &rt_.clock();

  c.res.set_header("Cache-Control", "no-cache");
  c.res.set_chunked_content_provider(
      "text/event-stream",
      [=](std::size_t, httplib::DataSink& sink) {
        if (!initial->empty()) {
          std::string first;
          first.swap(*initial);
          return sink.write(first.data(), first.size());
        }
        std::deque<audit::AuditRecord> batch;
        bool overflow = false;
        {
          std::unique_lock lock(queue->mu);
          queue->cv.wait_for(lock, kTailWait, [&] {
            return !queue->records.empty() || queue->overflow || stopping->load();
          });
          batch.swap(queue->records);
          overflow = queue->overflow;
        }
        if (stopping->load() || overflow) {
          sink.done();
          return true;
        }
        std::string out;
        for (const auto& r : batch) {
          if (r.seq < *next_seq) continue;
          out += audit_frame(r);
          *next_seq = r.seq + 1;
        }
        auto now = clock->mono_now();
        if (out.empty() && now - *last_write >= kKeepalive) out = ": keepalive\n\n";
        if (out.empty()) return sink.is_writable();
        *last_write = now;
        return sink.write(out.data(), out.size());
      },
      [log, sub](bool) { log->unsubscribe(sub); });
}

void AdminApi::health(Call& c) {
  auto snap = rt_.registry().current();
  json backends = json::object();
  bool all_healthy = true;
  for (const auto& b : snap->config().backends) {
    auto h = rt_.registry().health().get(b.id);
    if (h.state != HealthState::healthy) all_healthy = false;
    backends[b.id] = to_json(h);
  }
  bool audit_ok = rt_.audit().healthy();
  send_json(c.res, 200,
            {{"status", !audit_ok ? "degraded" : all_healthy ? "ok" : "partial"},
             {"audit_healthy", audit_ok},
             {"audit_next_seq", rt_.audit().next_seq()},
             {"generation", snap->generation()},
             {"active_bans", rt_.bans().list(rt_.clock().wall_now()).size()},
             {"backends", backends}});
}

bool AdminApi::serve_ui(const httplib::Request& req, httplib::Response& res) {
  if (settings_.ui_dir.empty()) return false;
  std::string rel = req.path.substr(std::string_view("/admin/ui").size());
  while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
  if (rel.empty()) rel = "index.html";
  if (rel.find('\0') != std::string::npos || rel.find('\\') != std::string::npos) return false;
  std::filesystem::path relp(rel);
  for (const auto& part : relp) {
    if (part == ".." || part == ".") return false;
  }
  std::error_code ec;
  auto root = std::filesystem::canonical(settings_.ui_dir, ec);
  if (ec) return false;
  auto file = std::filesystem::weakly_canonical(root / relp, ec);
  if (ec) return false;
  // Symlinks may not lead out of the UI directory.
  auto [r, f] = std::mismatch(root.begin(), root.end(), file.begin(), file.end());
  if (r != root.end() || !std::filesystem::is_regular_file(file, ec)) return false;
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  res.status = 200;
  res.set_content(buf.str(), content_type_for(file));
  return true;
}

void AdminApi::probe_later(const BackendServer& backend) {
  std::lock_guard lock(probes_mu_);
  if (stopping_->load()) return;
  probes_.emplace_back([this, backend] { rt_.health().probe(backend); });
}

std::variant<std::unique_ptr<AdminService>, std::string> AdminService::create(
    gateway::Runtime& runtime, const config::AdminSettings& settings) {
  auto addr = config::parse_listen_address(settings.address);
  if (!addr) return "admin: bad address '" + settings.address + "'";
  if (settings.keys.empty()) return std::string("admin: at least one key is required");
  std::unique_ptr<AdminService> svc(new AdminService());
  svc->api_ = std::make_unique<AdminApi>(runtime, settings);
  auto* api = svc->api_.get();
  auto bound = Listener::bind(addr->host, addr->port, std::nullopt,
                              [api](const httplib::Request& req, httplib::Response& res) {
                                api->handle(req, res);
                              });
  if (auto* err = std::get_if<std::string>(&bound)) return "admin: " + *err;
  svc->listener_ = std::move(std::get<std::unique_ptr<Listener>>(bound));
  return svc;
}

AdminService::~AdminService() { stop(); }

void AdminService::start() { listener_->start(); }

void AdminService::stop() {
  if (api_) api_->shutdown();
  if (listener_) listener_->stop();
}

}  // namespace mcpgw::admin
