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

#include "mcpgw/audit/audit_log.h"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <sstream>

#include "mcpgw/common/redact.h"

namespace mcpgw::audit {

using nlohmann::json;

namespace {

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<crypto::Digest> digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  auto bytes = crypto::from_hex(hex);
  if (!bytes) return std::nullopt;
  crypto::Digest d{};
  std::copy(bytes->begin(), bytes->end(), d.begin());
  return d;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

const char* to_string(Kind k) {
  switch (k) {
    case Kind::exchange: return "exchange";
    case Kind::auth_event: return "auth_event";
    case Kind::detection: return "detection";
    case Kind::ban_applied: return "ban_applied";
    case Kind::config_change: return "config_change";
    case Kind::rotation: return "rotation";
    case Kind::health_change: return "health_change";
  }
  return "exchange";
}

std::optional<Kind> parse_kind(std::string_view s) {
  for (auto k : {Kind::exchange, Kind::auth_event, Kind::detection, Kind::ban_applied,
                 Kind::config_change, Kind::rotation, Kind::health_change}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string canonical_form(std::uint64_t seq, std::int64_t observed_at_ms, Kind kind,
                           const Summary& summary) {
  json j = json::object();
  j["kind"] = to_string(kind);
  j["observed_at"] = observed_at_ms;
  j["seq"] = seq;
  j["summary"] = summary;
  return dump(j);
}

crypto::Digest compute_hash(const crypto::Digest& prev_hash, std::uint64_t seq,
                            std::int64_t observed_at_ms, Kind kind, const Summary& summary) {
  std::string buf(prev_hash.begin(), prev_hash.end());
  buf += canonical_form(seq, observed_at_ms, kind, summary);
  return crypto::sha256(buf);
}

std::string serialize_line(const AuditRecord& r) {
  json j = json::object();
  j["seq"] = r.seq;
  j["observed_at"] = r.observed_at_ms;
  j["kind"] = to_string(r.kind);
  j["summary"] = r.summary;
  j["prev_hash"] = crypto::to_hex(r.prev_hash);
  j["hash"] = crypto::to_hex(r.hash);
  return dump(j);
}

std::optional<AuditRecord> parse_line(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.size() != 6) return std::nullopt;
  for (auto key : {"seq", "observed_at", "kind", "summary", "prev_hash", "hash"}) {
    if (!j.contains(key)) return std::nullopt;
  }
  if (!j["seq"].is_number_unsigned() || !j["observed_at"].is_number_integer() ||
      !j["kind"].is_string() || !j["summary"].is_object() || !j["prev_hash"].is_string() ||
      !j["hash"].is_string()) {
    return std::nullopt;
  }
  AuditRecord r;
  r.seq = j["seq"].get<std::uint64_t>();
  r.observed_at_ms = j["observed_at"].get<std::int64_t>();
  auto kind = parse_kind(j["kind"].get<std::string>());
  if (!kind) return std::nullopt;
  r.kind = *kind;
  for (auto& [k, v] : j["summary"].items()) {
    if (!v.is_string()) return std::nullopt;
    r.summary.emplace(k, v.get<std::string>());
  }
  auto prev = digest_from_hex(j["prev_hash"].get<std::string>());
  auto hash = digest_from_hex(j["hash"].get<std::string>());
  if (!prev || !hash) return std::nullopt;
  r.prev_hash = *prev;
  r.hash = *hash;
  if (serialize_line(r) != line) return std::nullopt;
  return r;
}

ChainVerdict verify_chain(std::span<const AuditRecord> records) {
  crypto::Digest prev{};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::uint64_t expected = i;
    if (r.seq != expected) return ChainBroken{expected, "sequence gap"};
    if (r.prev_hash != prev) return ChainBroken{expected, "prev_hash mismatch"};
    if (compute_hash(r.prev_hash, r.seq, r.observed_at_ms, r.kind, r.summary) != r.hash) {
      return ChainBroken{expected, "hash mismatch"};
    }
    prev = r.hash;
  }
  return ChainOk{};
}

ChainVerdict verify_lines(std::span<const std::string> lines) {
  crypto::Digest prev{};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::uint64_t expected = i;
    auto r = parse_line(lines[i]);
    if (!r) return ChainBroken{expected, "unparsable record"};
    if (r->seq != expected) return ChainBroken{expected, "sequence gap"};
    if (r->prev_hash != prev) return ChainBroken{expected, "prev_hash mismatch"};
    if (compute_hash(r->prev_hash, r->seq, r->observed_at_ms, r->kind, r->summary) != r->hash) {
      return ChainBroken{expected, "hash mismatch"};
    }
    prev = r->hash;
  }
  return ChainOk{};
}

std::vector<std::filesystem::path> segment_files(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> out;
  for (int n = 1;; ++n) {
    std::filesystem::path seg = path;
    seg += "." + std::to_string(n);
    if (!std::filesystem::exists(seg)) break;
    out.push_back(seg);
  }
  if (std::filesystem::exists(path)) out.push_back(path);
  return out;
}

ChainVerdict verify_file(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& seg : segment_files(path)) {
    auto part = read_lines(seg);
    lines.insert(lines.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
  }
  return verify_lines(lines);
}

std::vector<AuditRecord> read_file(const std::filesystem::path& path) {
  std::vector<AuditRecord> out;
  for (const auto& seg : segment_files(path)) {
    for (const auto& line : read_lines(seg)) {
      if (auto r = parse_line(line)) out.push_back(std::move(*r));
    }
  }
  return out;
}

Summary redact_summary(const Summary& summary) {
  Summary out;
  for (const auto& [k, v] : summary) {
    out.emplace(k, is_sensitive_key(k) ? std::string(kRedacted) : redact_secrets(v));
  }
  return out;
}

AuditLog::AuditLog(AuditLogOptions options, const Clock& clock)
    : options_(std::move(options)), clock_(clock) {
  if (!options_.path.empty()) {
    std::error_code ec;
    if (options_.path.has_parent_path()) {
      std::filesystem::create_directories(options_.path.parent_path(), ec);
    }
    recover();
    open_segment();
  }
}

AuditLog::~AuditLog() = default;

void AuditLog::recover() {
  auto segments = segment_files(options_.path);
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    auto lines = read_lines(*it);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) continue;
    auto last = parse_line(lines.back());
    if (!last) {
      // Keep serving; the on-disk chain will fail verification at this point.
      healthy_ = false;
      return;
    }
    next_seq_ = last->seq + 1;
    prev_hash_ = last->hash;
    return;
  }
}

void AuditLog::open_segment() {
  out_.open(options_.path, std::ios::binary | std::ios::app);
  if (!out_) {
    healthy_ = false;
    return;
  }
  std::error_code ec;
  auto size = std::filesystem::file_size(options_.path, ec);
  segment_bytes_ = ec ? 0 : size;
}

bool AuditLog::write_line(const std::string& line) {
  if (options_.path.empty()) return true;
  if (fail_writes_ || !out_) return false;
  out_ << line << '\n';
  out_.flush();
  if (!out_) return false;
  segment_bytes_ += line.size() + 1;
  return true;
}

void AuditLog::rotate_locked() {
  auto segments = segment_files(options_.path);
  // segments includes the live file as its last element.
  std::size_t next_index = segments.empty() ? 1 : segments.size();
  AuditRecord r;
  r.seq = next_seq_;
  r.observed_at_ms = to_unix_millis(clock_.wall_now());
  r.kind = Kind::rotation;
  r.summary = {{"segment", std::to_string(next_index)}};
  r.prev_hash = prev_hash_;
  r.hash = compute_hash(r.prev_hash, r.seq, r.observed_at_ms, r.kind, r.summary);
  if (!write_line(serialize_line(r))) healthy_ = false;
  ++next_seq_;
  prev_hash_ = r.hash;
  out_.close();
  std::filesystem::path target = options_.path;
  target += "." + std::to_string(next_index);
  std::error_code ec;
  std::filesystem::rename(options_.path, target, ec);
  if (ec) healthy_ = false;
  open_segment();
}

AuditRecord AuditLog::append(Kind kind, const Summary& summary) {
  std::lock_guard lock(mu_);
  if (options_.max_segment_bytes > 0 && !options_.path.empty() &&
      segment_bytes_ >= options_.max_segment_bytes) {
    rotate_locked();
  }
  AuditRecord r;
  r.seq = next_seq_;
  r.observed_at_ms = to_unix_millis(clock_.wall_now());
  r.kind = kind;
  r.summary = redact_summary(summary);
  r.prev_hash = prev_hash_;
  r.hash = compute_hash(r.prev_hash, r.seq, r.observed_at_ms, r.kind, r.summary);
  if (!write_line(serialize_line(r))) healthy_ = false;
  ++next_seq_;
  prev_hash_ = r.hash;
  recent_.push_back(r);
  while (recent_.size() > options_.retained_in_memory) recent_.pop_front();
  for (auto& [id, fn] : subscribers_) fn(r);
  return r;
}

std::uint64_t AuditLog::next_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_;
}

std::vector<AuditRecord> AuditLog::tail(std::size_t n) const {
  std::lock_guard lock(mu_);
  auto start = recent_.size() > n ? recent_.size() - n : 0;
  return {recent_.begin() + static_cast<std::ptrdiff_t>(start), recent_.end()};
}

std::uint64_t AuditLog::subscribe(Subscriber fn) {
  std::lock_guard lock(mu_);
  auto id = next_subscriber_++;
  subscribers_.emplace(id, std::move(fn));
  return id;
}

void AuditLog::unsubscribe(std::uint64_t id) {
  std::lock_guard lock(mu_);
  subscribers_.erase(id);
}

}  // namespace mcpgw::audit
