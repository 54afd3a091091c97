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

#include "mcpgw/oauth/token_store.h"

#include <json.hpp>

#include <stdexcept>

#include "mcpgw/common/crypto.h"
#include "mcpgw/common/fs.h"

namespace mcpgw::oauth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json token_to_json(const TokenRecord& t) {
  return {{"token_hash", t.token_hash},       {"grant_id", t.grant_id},
          {"client_id", t.client_id},         {"subject", t.subject},
          {"scope", t.scope},                 {"resource_host", t.resource_host},
          {"issued_at", to_unix_millis(t.issued_at)},
          {"expires_at", to_unix_millis(t.expires_at)},
          {"revoked", t.revoked}};
}

TokenRecord token_from_json(const json& j) {
  TokenRecord t;
  t.token_hash = j.at("token_hash").get<std::string>();
  t.grant_id = j.value("grant_id", "");
  t.client_id = j.at("client_id").get<std::string>();
  t.subject = j.at("subject").get<std::string>();
  t.scope = j.at("scope").get<std::string>();
  t.resource_host = j.at("resource_host").get<std::string>();
  t.issued_at = from_unix_millis(j.at("issued_at").get<std::int64_t>());
  t.expires_at = from_unix_millis(j.at("expires_at").get<std::int64_t>());
  t.revoked = j.value("revoked", false);
  return t;
}

json client_to_json(const ClientRegistration& c) {
  return {{"client_id", c.client_id},
          {"client_name", c.client_name},
          {"redirect_uris", c.redirect_uris},
          {"token_endpoint_auth_method", c.token_endpoint_auth_method},
          {"created_at", to_unix_millis(c.created_at)}};
}

ClientRegistration client_from_json(const json& j) {
  ClientRegistration c;
  c.client_id = j.at("client_id").get<std::string>();
  c.client_name = j.value("client_name", "");
  c.redirect_uris = j.at("redirect_uris").get<std::vector<std::string>>();
  c.token_endpoint_auth_method = j.value("token_endpoint_auth_method", "none");
  c.created_at = from_unix_millis(j.value("created_at", std::int64_t{0}));
  return c;
}

json read_array(const fs::path& p) {
  auto text = read_text_file(p);
  if (!text) return json::array();
  auto j = json::parse(*text, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw std::runtime_error("corrupt state file: " + p.string());
  return j;
}

fs::file_time_type mtime_of(const fs::path& p) {
  std::error_code ec;
  auto t = fs::last_write_time(p, ec);
  return ec ? fs::file_time_type{} : t;
}

}  // namespace

TokenStore::TokenStore(fs::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) {
    salt_ = crypto::to_hex(crypto::random_bytes(32));
    return;
  }
  fs::create_directories(dir_);
  auto salt_file = dir_ / "salt";
  if (auto existing = read_text_file(salt_file); existing && existing->size() >= 64) {
    salt_ = existing->substr(0, 64);
  } else {
    salt_ = crypto::to_hex(crypto::random_bytes(32));
    write_file_atomic(salt_file, salt_, /*owner_only=*/true);
  }
  std::lock_guard lock(mu_);
  load_locked();
}

std::string TokenStore::hash(std::string_view secret) const {
  return crypto::salted_hash(salt_, secret);
}

void TokenStore::load_locked() {
  for (const auto& j : read_array(dir_ / "clients.json")) {
    auto c = client_from_json(j);
    clients_[c.client_id] = std::move(c);
  }
  for (const auto& j : read_array(dir_ / "tokens.json")) {
    auto t = token_from_json(j);
    tokens_[t.token_hash] = std::move(t);
  }
  tokens_mtime_ = mtime_of(dir_ / "tokens.json");
}

void TokenStore::reload_tokens_if_changed_locked() {
  if (dir_.empty()) return;
  auto path = dir_ / "tokens.json";
  auto m = mtime_of(path);
  if (m == tokens_mtime_) return;
  // Merge: revocation is sticky, everything else comes from whichever
  // process wrote the record.
  for (const auto& j : read_array(path)) {
    auto t = token_from_json(j);
    auto it = tokens_.find(t.token_hash);
    if (it == tokens_.end()) {
      tokens_.emplace(t.token_hash, std::move(t));
    } else if (t.revoked) {
      it->second.revoked = true;
    }
  }
  tokens_mtime_ = m;
}

void TokenStore::persist_clients_locked() {
  if (dir_.empty()) return;
  json j = json::array();
  for (const auto& [_, c] : clients_) j.push_back(client_to_json(c));
  write_file_atomic(dir_ / "clients.json", j.dump(1) + "\n");
}

void TokenStore::persist_tokens_locked() {
  if (dir_.empty()) return;
  reload_tokens_if_changed_locked();
  json j = json::array();
  for (const auto& [_, t] : tokens_) j.push_back(token_to_json(t));
  auto path = dir_ / "tokens.json";
  write_file_atomic(path, j.dump(1) + "\n", /*owner_only=*/true);
  tokens_mtime_ = mtime_of(path);
}

void TokenStore::add_client(const ClientRegistration& c) {
  std::lock_guard lock(mu_);
  clients_[c.client_id] = c;
  persist_clients_locked();
}

std::optional<ClientRegistration> TokenStore::find_client(std::string_view client_id) {
  std::lock_guard lock(mu_);
  auto it = clients_.find(client_id);
  if (it == clients_.end()) return std::nullopt;
  return it->second;
}

std::size_t TokenStore::client_count() const {
  std::lock_guard lock(mu_);
  return clients_.size();
}

void TokenStore::add_token(const TokenRecord& record) {
  std::lock_guard lock(mu_);
  tokens_[record.token_hash] = record;
  persist_tokens_locked();
}

std::optional<TokenRecord> TokenStore::find_token(std::string_view token_hash) {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(token_hash);
  if (it == tokens_.end()) {
    reload_tokens_if_changed_locked();
    it = tokens_.find(token_hash);
    if (it == tokens_.end()) return std::nullopt;
  }
  return it->second;
}

int TokenStore::revoke_grant(std::string_view grant_id) {
  std::lock_guard lock(mu_);
  int n = 0;
  for (auto& [_, t] : tokens_) {
    if (t.grant_id == grant_id && !t.revoked) {
      t.revoked = true;
      ++n;
    }
  }
  if (n > 0) persist_tokens_locked();
  return n;
}

std::vector<TokenRecord> TokenStore::tokens() const {
  std::lock_guard lock(mu_);
  std::vector<TokenRecord> out;
  for (const auto& [_, t] : tokens_) out.push_back(t);
  return out;
}

void TokenStore::prune(WallTime now) {
  std::lock_guard lock(mu_);
  reload_tokens_if_changed_locked();
  std::size_t before = tokens_.size();
  std::erase_if(tokens_, [&](const auto& kv) { return kv.second.expires_at <= now; });
  if (tokens_.size() != before) persist_tokens_locked();
}

}  // namespace mcpgw::oauth
