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

#include "mcpgw/policy/connection_limiter.h"

namespace mcpgw::policy {

std::optional<ConnectionLimiter::Slot> ConnectionLimiter::try_acquire(const std::string& peer) {
  std::lock_guard lock(mu_);
  auto& n = active_[peer];
  if (n >= max_per_peer_) return std::nullopt;
  ++n;
  return std::optional<Slot>(std::in_place, this, peer);
}

int ConnectionLimiter::active(const std::string& peer) const {
  std::lock_guard lock(mu_);
  auto it = active_.find(peer);
  return it == active_.end() ? 0 : it->second;
}

void ConnectionLimiter::release(const std::string& peer) {
  std::lock_guard lock(mu_);
  auto it = active_.find(peer);
  if (it == active_.end()) return;
  if (--it->second <= 0) active_.erase(it);
}

}  // namespace mcpgw::policy
