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

#include "mcpgw/gateway/router.h"

#include <algorithm>

namespace mcpgw::gateway {

bool prefix_covers(std::string_view prefix, std::string_view path) {
  if (prefix.empty() || prefix == "/") return true;
  if (prefix.back() == '/') prefix.remove_suffix(1);
  if (!path.starts_with(prefix)) return false;
  return path.size() == prefix.size() || path[prefix.size()] == '/';
}

const RouteConfig* route_request(const HttpExchange& req, std::span<const RouteConfig> table,
                                 std::string_view entry_point) {
  const RouteConfig* best = nullptr;
  for (const auto& r : table) {
    if (r.host_rule != req.host) continue;
    if (!entry_point.empty() && !r.entry_points.empty() &&
        std::find(r.entry_points.begin(), r.entry_points.end(), entry_point) ==
            r.entry_points.end()) {
      continue;
    }
    if (!prefix_covers(r.path_prefix, req.path)) continue;
    if (!best || r.path_prefix.size() > best->path_prefix.size() ||
        (r.path_prefix.size() == best->path_prefix.size() && r.id < best->id)) {
      best = &r;
    }
  }
  return best;
}

}  // namespace mcpgw::gateway
