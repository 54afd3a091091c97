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

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "mcpgw/common/clock.h"

namespace mcpgw::policy {

enum class RateKey { peer_ip, client_id, subject };

const char* to_string(RateKey k);
std::optional<RateKey> parse_rate_key(std::string_view s);

struct RateLimitSpec {
  RateKey key_by = RateKey::peer_ip;
  double rate = 1.0;  // tokens per second
  int burst = 1;

  bool valid() const { return rate > 0.0 && burst >= 1; }
  bool operator==(const RateLimitSpec&) const = default;
};

struct RateDecision {
  bool allowed = true;
  /// Seconds until one token has accrued; zero when allowed.
  double retry_after = 0.0;
};

/// Continuous-refill bucket. Starts full; each allowed request costs one
/// token.
class TokenBucket {
 public:
  TokenBucket(const RateLimitSpec& spec, MonoTime now);

  RateDecision take(MonoTime now);
  double tokens_at(MonoTime now) const;

 private:
  void refill(MonoTime now);

  double rate_;
  double burst_;
  double tokens_;
  MonoTime last_;
};

/// Buckets keyed by (limiter id, caller key). Each key's update is atomic.
class RateLimiter {
 public:
  RateDecision check(std::string_view limiter_id, std::string_view key, const RateLimitSpec& spec,
                     MonoTime now);

  void reset();

 private:
  struct Slot {
    RateLimitSpec spec;
    TokenBucket bucket;
  };
  std::mutex mu_;
  std::unordered_map<std::string, Slot> buckets_;
};

/// Decimal seconds with millisecond resolution, rounded up so that a client
/// honouring it always finds a token.
std::string format_retry_after(double seconds);

}  // namespace mcpgw::policy
