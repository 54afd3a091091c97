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
#include <cstdint>
#include <mutex>

namespace mcpgw {

using WallTime = std::chrono::system_clock::time_point;
using MonoTime = std::chrono::steady_clock::time_point;

/// Time source seam. Wall time stamps persisted state (bans, tokens, audit);
/// monotonic time drives rate limiting.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual WallTime wall_now() const = 0;
  virtual MonoTime mono_now() const = 0;
};

class SystemClock final : public Clock {
 public:
  WallTime wall_now() const override { return std::chrono::system_clock::now(); }
  MonoTime mono_now() const override { return std::chrono::steady_clock::now(); }

  static SystemClock& instance();
};

/// Manually advanced clock for deterministic tests. Both time lines move
/// together.
class FakeClock final : public Clock {
 public:
  explicit FakeClock(WallTime start = WallTime{std::chrono::seconds{1'760'000'000}})
      : wall_(start) {}

  WallTime wall_now() const override {
    std::lock_guard lock(mu_);
    return wall_;
  }
  MonoTime mono_now() const override {
    std::lock_guard lock(mu_);
    return mono_;
  }

  template <typename Rep, typename Period>
  void advance(std::chrono::duration<Rep, Period> d) {
    std::lock_guard lock(mu_);
    auto delta = std::chrono::duration_cast<std::chrono::nanoseconds>(d);
    wall_ += std::chrono::duration_cast<WallTime::duration>(delta);
    mono_ += std::chrono::duration_cast<MonoTime::duration>(delta);
  }

  void advance_seconds(double s) {
    advance(std::chrono::duration<double>(s));
  }

 private:
  mutable std::mutex mu_;
  WallTime wall_;
  MonoTime mono_{};
};

inline std::int64_t to_unix_millis(WallTime t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

inline WallTime from_unix_millis(std::int64_t ms) {
  return WallTime{std::chrono::milliseconds{ms}};
}

}  // namespace mcpgw
