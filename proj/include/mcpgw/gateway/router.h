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

#include <span>
#include <string_view>

#include "mcpgw/common/http.h"
#include "mcpgw/common/model.h"

namespace mcpgw::gateway {

/// Segment-aware: "/sse" covers "/sse" and "/sse/x" but not "/ssefoo".
/// "/" covers everything.
bool prefix_covers(std::string_view prefix, std::string_view path);

/// Exact host, then the longest covering prefix; equal prefixes fall to
/// the smaller route id. Routes restricted to other entry points are
/// invisible. An empty `entry_point` disables that filter. nullptr is
/// NotFound.
const RouteConfig* route_request(const HttpExchange& req, std::span<const RouteConfig> table,
                                 std::string_view entry_point = {});

}  // namespace mcpgw::gateway
