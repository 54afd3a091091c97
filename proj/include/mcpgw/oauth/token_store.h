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

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mcpgw/common/clock.h"
#include "mcpgw/oauth/types.h"

namespace mcpgw::oauth {

/// Registered clients and issued tokens, keyed by salted hashes of their
/// secrets. Optionally persisted as JSON under a state directory so tokens
/// survive restarts and `token mint --dev` can hand tokens to a running
/// gateway.
///
/// Thread-safe. Files are written with tmp+rename; a lookup miss re-reads
/// the token file if another process changed it.
class TokenStore {
 public:
  /// Empty `dir` keeps everything in memory with a per-process salt.
  explicit TokenStore(std::filesystem::path dir);

  const std::string& salt() const { return salt_; }
  std::string hash(std::string_view secret) const;

  void add_client(const ClientRegistration& c);
  std::optional<ClientRegistration> find_client(std::string_view client_id);
  std::size_t client_count() const;

  /// Stores `record` (whose token_hash must already be set).
  void add_token(const TokenRecord& record);
  std::optional<TokenRecord> find_token(std::string_view token_hash);
  /// Returns how many live tokens were revoked.
  int revoke_grant(std::string_view grant_id);
  std::vector<TokenRecord> tokens() const;

  /// Drops records that expired before `now`.
  void prune(WallTime now);

 private:
  void load_locked();
  void reload_tokens_if_changed_locked();
  void persist_clients_locked();
  void persist_tokens_locked();

  std::filesystem::path dir_;
  std::string salt_;
  mutable std::mutex mu_;
  std::map<std::string, ClientRegistration, std::less<>> clients_;
  std::map<std::string, TokenRecord, std::less<>> tokens_;
  std::filesystem::file_time_type tokens_mtime_{};
};

}  // namespace mcpgw::oauth
