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

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcpgw/common/clock.h"
#include "mcpgw/common/crypto.h"

namespace mcpgw::audit {

/// `rotation` marks the last record of a rotated-out segment; the chain
/// continues in the next file.
enum class Kind { exchange, auth_event, detection, ban_applied, config_change, rotation,
                  health_change };

const char* to_string(Kind k);
std::optional<Kind> parse_kind(std::string_view s);

using Summary = std::map<std::string, std::string>;

struct AuditRecord {
  std::uint64_t seq = 0;
  std::int64_t observed_at_ms = 0;
  Kind kind = Kind::exchange;
  Summary summary;
  crypto::Digest prev_hash{};
  crypto::Digest hash{};

  bool operator==(const AuditRecord&) const = default;
};

/// Sorted keys, UTF-8, no insignificant whitespace, minimal decimal integers.
std::string canonical_form(std::uint64_t seq, std::int64_t observed_at_ms, Kind kind,
                           const Summary& summary);

crypto::Digest compute_hash(const crypto::Digest& prev_hash, std::uint64_t seq,
                            std::int64_t observed_at_ms, Kind kind, const Summary& summary);

/// One JSON object per line, hashes lowercase hex. No trailing newline.
std::string serialize_line(const AuditRecord& record);

/// Strict: rejects unknown or missing members, uppercase hex, or any line that
/// is not byte-identical to the serialization of what it parses to.
std::optional<AuditRecord> parse_line(std::string_view line);

struct ChainOk {};
struct ChainBroken {
  std::uint64_t first_bad_seq = 0;
  std::string reason;
};
using ChainVerdict = std::variant<ChainOk, ChainBroken>;

inline bool is_ok(const ChainVerdict& v) { return std::holds_alternative<ChainOk>(v); }

/// Recomputes every hash; Ok iff all match and seq is gapless from 0.
ChainVerdict verify_chain(std::span<const AuditRecord> records);

/// Same check over raw lines; an unparsable line is broken at the seq its
/// position implies.
ChainVerdict verify_lines(std::span<const std::string> lines);

/// Segments in chain order: `<path>.1`, `<path>.2`, ..., then `<path>`.
std::vector<std::filesystem::path> segment_files(const std::filesystem::path& path);

/// Verifies the log at `path` including rotated predecessors.
ChainVerdict verify_file(const std::filesystem::path& path);

std::vector<AuditRecord> read_file(const std::filesystem::path& path);

/// Applied to every summary before it is sealed.
Summary redact_summary(const Summary& summary);

class AuditSink {
 public:
  virtual ~AuditSink() = default;
  virtual AuditRecord append(Kind kind, const Summary& summary) = 0;
};

struct AuditLogOptions {
  /// Empty keeps the chain in memory only.
  std::filesystem::path path;
  /// Segment size that triggers rotation; 0 disables rotation.
  std::uint64_t max_segment_bytes = 64ull << 20;
  std::size_t retained_in_memory = 2048;
};

/// Single-writer hash-chained log. Appends are totally ordered by `seq`.
class AuditLog final : public AuditSink {
 public:
  using Subscriber = std::function<void(const AuditRecord&)>;

  AuditLog(AuditLogOptions options, const Clock& clock);
  ~AuditLog() override;

  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  AuditRecord append(Kind kind, const Summary& summary) override;

  /// False once any write has failed. Serving continues regardless.
  bool healthy() const { return healthy_.load(); }

  std::uint64_t next_seq() const;
  std::vector<AuditRecord> tail(std::size_t n) const;

  /// Subscribers run under the writer lock, after the record is on disk.
  std::uint64_t subscribe(Subscriber fn);
  void unsubscribe(std::uint64_t id);

  /// Test seam: makes subsequent writes fail as if the disk went away.
  void simulate_write_failure(bool fail) { fail_writes_ = fail; }

 private:
  void open_segment();
  void recover();
  bool write_line(const std::string& line);
  void rotate_locked();

  AuditLogOptions options_;
  const Clock& clock_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::uint64_t segment_bytes_ = 0;
  std::uint64_t next_seq_ = 0;
  crypto::Digest prev_hash_{};
  std::deque<AuditRecord> recent_;
  std::map<std::uint64_t, Subscriber> subscribers_;
  std::uint64_t next_subscriber_ = 1;
  std::atomic<bool> healthy_{true};
  std::atomic<bool> fail_writes_{false};
};

}  // namespace mcpgw::audit
