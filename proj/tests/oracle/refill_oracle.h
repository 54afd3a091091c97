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

// Scalar token-bucket model in exact integer arithmetic:
// level(t) = min(burst, level(t_prev) + rate * (t - t_prev)), starting full.
// Times are integer milliseconds and rate is the rational num/den tokens per
// second, so levels are counted in units of 1/(1000*den) token and no
// rounding ever happens. Independent of the gateway's clock and float types.

#pragma once

#include <algorithm>
#include <cstdint>

namespace oracle {

struct RefillOutcome {
  bool allowed;
  double retry_after;
};

class RefillOracle {
 public:
  RefillOracle(std::int64_t rate_num, std::int64_t rate_den, std::int64_t burst)
      : num_(rate_num), unit_(1000 * rate_den), cap_(burst * unit_), level_(cap_) {}

  RefillOutcome request(std::int64_t t_ms) {
    if (has_prev_) level_ = std::min(cap_, level_ + num_ * (t_ms - prev_ms_));
    has_prev_ = true;
    prev_ms_ = t_ms;
    if (level_ >= unit_) {
      level_ -= unit_;
      return {true, 0.0};
    }
    // Missing units accrue at num_ units per millisecond.
    return {false, static_cast<double>(unit_ - level_) / static_cast<double>(num_) / 1000.0};
  }

 private:
  std::int64_t num_;
  std::int64_t unit_;
  std::int64_t cap_;
  std::int64_t level_;
  std::int64_t prev_ms_ = 0;
  bool has_prev_ = false;
};

}  // namespace oracle
