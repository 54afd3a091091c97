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

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcpgw {

inline constexpr std::string_view kRedacted = "[REDACTED]";

/// Prefixes of every secret handle this gateway mints.
inline constexpr std::string_view kAccessTokenPrefix = "mcpat_";
inline constexpr std::string_view kAuthCodePrefix = "mcpac_";
inline constexpr std::string_view kSessionPrefix = "mcpss_";

/// Blanks credential material: Bearer values, gateway-minted handles and the
/// values of credential-named parameters (access_token=, "code": ...).
std::string redact_secrets(std::string_view text);

/// Byte ranges [begin, end) that redact_secrets replaces, in order and
/// non-overlapping. Lets callers cut a window out of `text` without leaving
/// a secret whose marker fell outside the window.
std::vector<std::pair<std::size_t, std::size_t>> secret_spans(std::string_view text);

/// True for summary/parameter names whose values are always secret.
bool is_sensitive_key(std::string_view key);

}  // namespace mcpgw
