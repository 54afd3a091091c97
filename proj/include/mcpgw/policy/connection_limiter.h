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

namespace mcpgw::policy {

inline constexpr int kDefaultMaxStreamsPerPeer = 16;

/// Caps concurrent long-lived streams per peer.
class ConnectionLimiter {
 public:
  class Slot {
   public:
    Slot(ConnectionLimiter* owner, std::string peer) : owner_(owner), peer_(std::move(peer)) {}
    Slot(Slot&& other) noexcept : owner_(other.owner_), peer_(std::move(other.peer_)) {
      other.owner_ = nullptr;
    }
    Slot& operator=(Slot&&) = delete;
    Slot(const Slot&) = delete;
    ~Slot() {
      if (owner_) owner_->release(peer_);
    }

   private:
    ConnectionLimiter* owner_;
    std::string peer_;
  };

  explicit ConnectionLimiter(int max_per_peer = kDefaultMaxStreamsPerPeer)
      : max_per_peer_(max_per_peer) {}

  std::optional<Slot> try_acquire(const std::string& peer);
  int active(const std::string& peer) const;
  int max_per_peer() const { return max_per_peer_; }
  void set_max_per_peer(int n) {
    std::lock_guard lock(mu_);
    max_per_peer_ = n;
  }

 private:
  void release(const std::string& peer);

  mutable std::mutex mu_;
  int max_per_peer_;
  std::map<std::string, int> active_;
};

}  // namespace mcpgw::policy
