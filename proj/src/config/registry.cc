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

#include "mcpgw/config/registry.h"

#include <algorithm>
#include <set>

#include "mcpgw/common/fs.h"
#include "mcpgw/common/http.h"

namespace mcpgw::config {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::string_view kOnboardedDir = "onboarded";
constexpr std::string_view kOverridesDir = "route_overrides";

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ",";
    out += x;
  }
  return out;
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<json> read_json(const fs::path& p, Diagnostics& d) {
  auto text = read_text_file(p);
  if (!text) {
    d.push_back({p.string(), "unreadable"});
    return std::nullopt;
  }
  auto j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) {
    d.push_back({p.string(), "not valid JSON"});
    return std::nullopt;
  }
  return j;
}

/// Rewrites "routers[3].middleware_ids[0]" to "middleware_ids[0]" so
/// onboarding errors point at descriptor fields.
Diagnostics relative_to(const Diagnostics& in, const std::string& route_path,
                        const std::string& backend_path) {
  Diagnostics out;
  for (auto d : in) {
    for (const auto& prefix : {route_path, backend_path}) {
      if (d.path == prefix) {
        d.path.clear();
      } else if (d.path.starts_with(prefix + ".")) {
        d.path = d.path.substr(prefix.size() + 1);
      }
    }
    out.push_back(d);
  }
  return out;
}

RegistryError invalid(Diagnostics d) { return {RegistryError::Kind::invalid, std::move(d)}; }

}  // namespace

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '-') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

std::string slugify(std::string_view name) {
  std::string out;
  for (char c : name) {
    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if ((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9')) {
      out.push_back(l);
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  if (out.size() > 48) out.resize(48);
  return out.empty() ? "server" : out;
}

std::optional<OnboardDescriptor> descriptor_from_json(const json& j, Diagnostics& d) {
  auto before = d.size();
  if (!j.is_object()) {
    d.push_back({"", "expected a JSON object"});
    return std::nullopt;
  }
  OnboardDescriptor out;
  std::set<std::string> known = {"display_name", "upstream_url", "host_rule", "middleware_ids",
                                 "path_prefix",  "entry_points", "id"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) d.push_back({it.key(), "unknown field"});
  }
  auto str = [&](const char* key, std::string& field, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) d.push_back({key, "required"});
      return;
    }
    if (!it->is_string()) {
      d.push_back({key, "expected a string"});
      return;
    }
    field = it->get<std::string>();
    if (required && field.empty()) d.push_back({key, "must not be empty"});
  };
  auto list = [&](const char* key, std::vector<std::string>& field) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    if (!it->is_array()) {
      d.push_back({key, "expected a list"});
      return;
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) {
        d.push_back({std::string(key) + "[" + std::to_string(i) + "]", "expected a string"});
      } else {
        field.push_back((*it)[i].get<std::string>());
      }
    }
  };
  str("display_name", out.display_name, true);
  str("upstream_url", out.upstream_url, true);
  str("host_rule", out.host_rule, true);
  str("path_prefix", out.path_prefix, false);
  str("id", out.id, false);
  list("middleware_ids", out.middleware_ids);
  list("entry_points", out.entry_points);
  if (!out.id.empty() && !is_safe_id(out.id)) {
    d.push_back({"id", "expected lowercase letters, digits and '-'"});
  }
  if (d.size() != before) return std::nullopt;
  return out;
}

BackendHealth HealthTable::get(std::string_view id) const {
  std::lock_guard lock(mu_);
  auto it = table_.find(id);
  return it == table_.end() ? BackendHealth{} : it->second;
}

BackendHealth HealthTable::set(const std::string& id, BackendHealth h) {
  std::lock_guard lock(mu_);
  auto& slot = table_[id];
  auto prev = slot;
  slot = h;
  return prev;
}

std::map<std::string, BackendHealth> HealthTable::all() const {
  std::lock_guard lock(mu_);
  return {table_.begin(), table_.end()};
}

Registry::Registry(SnapshotPtr snap, const Clock& clock, audit::AuditSink* audit)
    : clock_(clock), audit_(audit), snap_(std::move(snap)) {}

std::variant<std::unique_ptr<Registry>, Diagnostics> Registry::open(SnapshotPtr base,
                                                                    const Clock& clock,
                                                                    audit::AuditSink* audit) {
  GatewayConfig merged = base->config();
  Diagnostics d;
  if (!merged.state_dir.empty()) {
    fs::path dir(merged.state_dir);
    for (const auto& file : json_files(dir / kOnboardedDir)) {
      auto j = read_json(file, d);
      if (!j) continue;
      if (!j->is_object() || !j->contains("backend") || !j->contains("route")) {
        d.push_back({file.string(), "expected {\"backend\": ..., \"route\": ...}"});
        continue;
      }
      auto b = backend_from_json((*j)["backend"], file.string() + ":backend", d);
      auto r = route_from_json((*j)["route"], file.string() + ":route", d);
      if (b && r) {
        merged.backends.push_back(*b);
        merged.routers.push_back(*r);
      }
    }
    for (const auto& file : json_files(dir / kOverridesDir)) {
      auto j = read_json(file, d);
      if (!j) continue;
      auto id = j->value("route_id", std::string());
      auto it = std::find_if(merged.routers.begin(), merged.routers.end(),
                             [&](const RouteConfig& r) { return r.id == id; });
      if (it == merged.routers.end()) {
        d.push_back({file.string(), "override for unknown route '" + id + "'"});
        continue;
      }
      auto mids = j->value("middleware_ids", json::array());
      if (!mids.is_array()) {
        d.push_back({file.string(), "middleware_ids must be a list"});
        continue;
      }
      it->middleware_ids.clear();
      for (const auto& m : mids) {
        if (m.is_string()) it->middleware_ids.push_back(m.get<std::string>());
      }
      it->version = j->value("version", it->version);
    }
  }
  if (!d.empty()) return d;
  auto built = ConfigSnapshot::build(std::move(merged), base->generation());
  if (auto* bd = std::get_if<Diagnostics>(&built)) return *bd;
  return std::unique_ptr<Registry>(new Registry(std::get<SnapshotPtr>(built), clock, audit));
}

SnapshotPtr Registry::current() const {
  std::lock_guard lock(snap_mu_);
  return snap_;
}

void Registry::publish(SnapshotPtr next) {
  std::lock_guard lock(snap_mu_);
  snap_ = std::move(next);
}

fs::path Registry::state_dir() const { return current()->config().state_dir; }

std::variant<OnboardResult, RegistryError> Registry::onboard(const OnboardDescriptor& desc,
                                                             std::string_view actor) {
  std::lock_guard write(write_mu_);
  auto snap = current();
  GatewayConfig next = snap->config();

  Diagnostics d;
  for (const auto& r : next.routers) {
    if (r.host_rule == desc.host_rule) {
      d.push_back({"host_rule", "host '" + desc.host_rule + "' is already routed by '" + r.id + "'"});
    }
  }
  if (desc.host_rule == next.oauth.issuer_host) {
    d.push_back({"host_rule", "collides with the authorization server host"});
  }
  auto taken = [&](const std::string& id) {
    return snap->find_backend(id) || snap->find_route(id + "-router");
  };
  std::string id = desc.id;
  if (!id.empty()) {
    if (taken(id)) d.push_back({"id", "id '" + id + "' is already in use"});
  } else {
    auto base = slugify(desc.display_name);
    id = base;
    for (int n = 2; taken(id); ++n) id = base + "-" + std::to_string(n);
  }
  if (!d.empty()) return invalid(std::move(d));

  BackendServer backend;
  backend.id = id;
  backend.display_name = desc.display_name;
  backend.upstream_url = desc.upstream_url;
  backend.onboarded_at_ms = to_unix_millis(clock_.wall_now());
  RouteConfig route;
  route.id = id + "-router";
  route.host_rule = desc.host_rule;
  route.path_prefix = desc.path_prefix;
  route.entry_points = desc.entry_points;
  route.middleware_ids = desc.middleware_ids;
  route.backend_id = id;
  next.backends.push_back(backend);
  next.routers.push_back(route);

  auto built = ConfigSnapshot::build(std::move(next), snap->generation() + 1);
  if (auto* bd = std::get_if<Diagnostics>(&built)) {
    return invalid(relative_to(*bd, "routers[" + std::to_string(snap->config().routers.size()) + "]",
                               "backends[" + std::to_string(snap->config().backends.size()) + "]"));
  }

  auto dir = state_dir();
  if (!dir.empty()) {
    json doc = {{"backend", to_json(backend)}, {"route", to_json(route)}};
    try {
      write_file_atomic(dir / kOnboardedDir / (id + ".json"), doc.dump(2) + "\n");
    } catch (const std::exception& e) {
      return RegistryError{RegistryError::Kind::io, {{"", e.what()}}};
    }
  }
  publish(std::get<SnapshotPtr>(built));
  health_.set(id, BackendHealth{});
  if (audit_) {
    audit_->append(audit::Kind::config_change, {{"action", "onboard_server"},
                                                {"backend", id},
                                                {"route", route.id},
                                                {"host_rule", route.host_rule},
                                                {"middleware_ids", join(route.middleware_ids)},
                                                {"actor", std::string(actor)}});
  }
  return OnboardResult{backend, route};
}

std::variant<RouteConfig, RegistryError> Registry::set_route_middlewares(
    std::string_view route_id, const std::vector<std::string>& middleware_ids,
    std::optional<std::uint64_t> expected_version, std::string_view actor) {
  std::lock_guard write(write_mu_);
  auto snap = current();
  GatewayConfig next = snap->config();
  auto it = std::find_if(next.routers.begin(), next.routers.end(),
                         [&](const RouteConfig& r) { return r.id == route_id; });
  if (it == next.routers.end()) {
    return RegistryError{RegistryError::Kind::not_found,
                         {{"", "no route '" + std::string(route_id) + "'"}}};
  }
  if (expected_version && *expected_version != it->version) {
    return RegistryError{RegistryError::Kind::conflict,
                         {{"version", "route is at version " + std::to_string(it->version)}}};
  }
  auto pos = static_cast<std::size_t>(it - next.routers.begin());
  it->middleware_ids = middleware_ids;
  it->version += 1;
  RouteConfig updated = *it;

  auto built = ConfigSnapshot::build(std::move(next), snap->generation() + 1);
  if (auto* bd = std::get_if<Diagnostics>(&built)) {
    return invalid(relative_to(*bd, "routers[" + std::to_string(pos) + "]", "\x01"));
  }
  auto dir = state_dir();
  if (!dir.empty()) {
    json doc = {{"route_id", updated.id},
                {"middleware_ids", updated.middleware_ids},
                {"version", updated.version}};
    try {
      write_file_atomic(dir / kOverridesDir / (percent_encode(updated.id) + ".json"),
                        doc.dump(2) + "\n");
    } catch (const std::exception& e) {
      return RegistryError{RegistryError::Kind::io, {{"", e.what()}}};
    }
  }
  publish(std::get<SnapshotPtr>(built));
  if (audit_) {
    audit_->append(audit::Kind::config_change, {{"action", "set_route_middlewares"},
                                                {"route", updated.id},
                                                {"middleware_ids", join(updated.middleware_ids)},
                                                {"version", std::to_string(updated.version)},
                                                {"actor", std::string(actor)}});
  }
  return updated;
}

}  // namespace mcpgw::config
