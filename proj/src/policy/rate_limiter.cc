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

#include "mcpgw/policy/rate_limiter.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mcpgw::policy {

const char* to_string(RateKey k) {
  switch (k) {
    case RateKey::peer_ip: return "peer_ip";
    case RateKey::client_id: return "client_id";
    case RateKey::subject: return "subject";
  }
  return "peer_ip";
}

std::optional<RateKey> parse_rate_key(std::string_view s) {
  if (s == "peer_ip") return RateKey::peer_ip;
  if (s == "client_id") return RateKey::client_id;
  if (s == "subject") return RateKey::subject;
  return std::nullopt;
}

TokenBucket::TokenBucket(const RateLimitSpec& spec, MonoTime now)
    : rate_(spec.rate), burst_(spec.burst), tokens_(spec.burst), last_(now) {}

void TokenBucket::refill(MonoTime now) {
  if (now <= last_) return;
  double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  last_ = now;
}

double TokenBucket::tokens_at(MonoTime now) const {
  if (now <= last_) return tokens_;
  double elapsed = std::chrono::duration<double>(now - last_).count();
  return std::min(burst_, tokens_ + elapsed * rate_);
}

RateDecision TokenBucket::take(MonoTime now) {
  refill(now);
  // Absorbs float drift so a token that is due exactly now counts as present.
  constexpr double kEpsilon = 1e-9;
  if (tokens_ >= 1.0 - kEpsilon) {
    tokens_ = std::max(0.0, tokens_ - 1.0);
    return {true, 0.0};
  }
  return {false, (1.0 - tokens_) / rate_};
}

RateDecision RateLimiter::check(std::string_view limiter_id, std::string_view key,
                                const RateLimitSpec& spec, MonoTime now) {
  std::string slot_key;
  slot_key.reserve(limiter_id.size() + key.size() + 1);
  slot_key.append(limiter_id).push_back('\0');
  slot_key.append(key);

  std::lock_guard lock(mu_);
  auto it = buckets_.find(slot_key);
  if (it == buckets_.end() || !(it->second.spec == spec)) {
    // A changed spec starts a fresh, full bucket.
    it = buckets_.insert_or_assign(slot_key, Slot{spec, TokenBucket(spec, now)}).first;
  }
  return it->second.bucket.take(now);
}

void RateLimiter::reset() {
  std::lock_guard lock(mu_);
  buckets_.clear();
}

std::string format_retry_after(double seconds) {
  double ms = std::ceil(seconds * 1000.0 - 1e-9);
  if (ms < 0) ms = 0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms / 1000.0);
  return buf;
}

}  // namespace mcpgw::policy
