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

#include "mcpgw/policy/ban_store.h"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

#include "mcpgw/common/crypto.h"
#include "mcpgw/common/fs.h"

namespace mcpgw::policy {

using nlohmann::json;

const char* to_string(BanSource s) {
  return s == BanSource::operator_ ? "operator" : "detection";
}

namespace {

json to_json(const BanEntry& e) {
  return {{"id", e.id},
          {"target", e.target},
          {"reason", e.reason},
          {"created_at", to_unix_millis(e.created_at)},
          {"expires_at", to_unix_millis(e.expires_at)},
          {"source", to_string(e.source)}};
}

BanEntry from_json(const json& j) {
  BanEntry e;
  e.id = j.at("id").get<std::string>();
  e.target = j.at("target").get<std::string>();
  e.reason = j.value("reason", "");
  e.created_at = from_unix_millis(j.at("created_at").get<std::int64_t>());
  e.expires_at = from_unix_millis(j.at("expires_at").get<std::int64_t>());
  e.source = j.value("source", "detection") == "operator" ? BanSource::operator_
                                                           : BanSource::detection;
  return e;
}

}  // namespace

BanStore::BanStore(std::filesystem::path file, const Clock& clock, audit::AuditSink* audit)
    : file_(std::move(file)), clock_(clock), audit_(audit),
      current_(std::make_shared<const Snapshot>()) {
  load();
}

std::shared_ptr<const BanStore::Snapshot> BanStore::snapshot() const {
  std::lock_guard lock(ptr_mu_);
  return current_;
}

void BanStore::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(ptr_mu_);
  current_ = std::move(next);
}

void BanStore::load() {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::ifstream in(file_);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_array()) {
    throw std::runtime_error("ban store is corrupt: " + file_.string());
  }
  auto s = std::make_shared<Snapshot>();
  for (const auto& item : j) s->push_back(from_json(item));
  publish(std::move(s));
}

void BanStore::persist(const Snapshot& s) {
  if (file_.empty()) return;
  json j = json::array();
  for (const auto& e : s) j.push_back(to_json(e));
  write_file_atomic(file_, j.dump(2) + "\n");
}

BanEntry BanStore::apply(BanEntry entry) {
  if (entry.expires_at <= entry.created_at) {
    throw std::invalid_argument("ban must expire after it is created");
  }
  if (entry.target.empty()) throw std::invalid_argument("ban target is empty");

  std::lock_guard lock(write_mu_);
  auto now = clock_.wall_now();
  auto next = std::make_shared<Snapshot>(*snapshot());
  BanEntry result;
  bool extended = false;
  auto it = std::find_if(next->begin(), next->end(), [&](const BanEntry& e) {
    return e.target == entry.target && e.active_at(now);
  });
  if (it != next->end()) {
    it->expires_at = std::max(it->expires_at, entry.expires_at);
    result = *it;
    extended = true;
  } else {
    if (entry.id.empty()) entry.id = "ban_" + crypto::to_hex(crypto::random_bytes(8));
    next->push_back(entry);
    result = entry;
  }
  // Expired entries are dropped on write so the file does not grow forever.
  std::erase_if(*next, [&](const BanEntry& e) { return !e.active_at(now); });
  persist(*next);
  publish(std::move(next));

  if (audit_) {
    audit_->append(audit::Kind::ban_applied,
                   {{"ban_id", result.id},
                    {"target", result.target},
                    {"reason", result.reason},
                    {"source", to_string(result.source)},
                    {"expires_at", std::to_string(to_unix_millis(result.expires_at))},
                    {"extended", extended ? "true" : "false"}});
  }
  return result;
}

std::optional<BanEntry> BanStore::check(std::string_view peer_ip,
                                        std::optional<std::string_view> client_id,
                                        WallTime now) const {
  auto s = snapshot();
  for (const auto& e : *s) {
    if (!e.active_at(now)) continue;
    if ((!peer_ip.empty() && e.target == peer_ip) || (client_id && e.target == *client_id)) {
      return e;
    }
  }
  return std::nullopt;
}

std::vector<BanEntry> BanStore::list(WallTime now, bool include_expired) const {
  std::vector<BanEntry> out;
  for (const auto& e : *snapshot()) {
    if (include_expired || e.active_at(now)) out.push_back(e);
  }
  return out;
}

std::optional<BanEntry> BanStore::find(std::string_view id) const {
  for (const auto& e : *snapshot()) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

bool BanStore::lift(std::string_view id, std::string_view actor) {
  std::lock_guard lock(write_mu_);
  auto next = std::make_shared<Snapshot>(*snapshot());
  auto it = std::find_if(next->begin(), next->end(), [&](const BanEntry& e) { return e.id == id; });
  if (it == next->end()) return false;
  std::string target = it->target;
  next->erase(it);
  persist(*next);
  publish(std::move(next));
  if (audit_) {
    audit_->append(audit::Kind::config_change, {{"action", "lift_ban"},
                                                {"ban_id", std::string(id)},
                                                {"target", target},
                                                {"actor", std::string(actor)}});
  }
  return true;
}

}  // namespace mcpgw::policy
