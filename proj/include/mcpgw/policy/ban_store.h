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

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/clock.h"

namespace mcpgw::policy {

enum class BanSource { detection, operator_ };

const char* to_string(BanSource s);

inline constexpr std::chrono::seconds kDefaultDetectionBanTtl{600};
inline constexpr std::chrono::hours kDefaultOperatorBanTtl{24};

struct BanEntry {
  std::string id;
  /// Peer IP or client_id.
  std::string target;
  std::string reason;
  WallTime created_at{};
  WallTime expires_at{};
  BanSource source = BanSource::detection;

  bool active_at(WallTime now) const { return now < expires_at; }
  bool operator==(const BanEntry&) const = default;
};

/// Persistent ban list. Reads take an immutable snapshot; writes replace it
/// and rewrite the backing file.
class BanStore {
 public:
  /// An empty `file` keeps bans in memory only.
  BanStore(std::filesystem::path file, const Clock& clock, audit::AuditSink* audit);

  /// Throws std::invalid_argument when expires_at <= created_at. A second ban
  /// on an actively banned target extends it to the later expiry and returns
  /// the existing entry.
  BanEntry apply(BanEntry entry);

  std::optional<BanEntry> check(std::string_view peer_ip, std::optional<std::string_view> client_id,
                                WallTime now) const;

  std::vector<BanEntry> list(WallTime now, bool include_expired = false) const;
  std::optional<BanEntry> find(std::string_view id) const;
  /// Audits one config_change (action lift_ban) before returning true.
  bool lift(std::string_view id, std::string_view actor = {});

 private:
  using Snapshot = std::vector<BanEntry>;

  std::shared_ptr<const Snapshot> snapshot() const;
  void publish(std::shared_ptr<const Snapshot> next);
  void load();
  void persist(const Snapshot& s);

  std::filesystem::path file_;
  const Clock& clock_;
  audit::AuditSink* audit_;
  std::mutex write_mu_;
  // Guards only the pointer swap; readers never wait on a file write.
  mutable std::mutex ptr_mu_;
  std::shared_ptr<const Snapshot> current_;
};

}  // namespace mcpgw::policy
