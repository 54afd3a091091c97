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

#include <json.hpp>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcpgw::inspect {

struct ToolDescriptor {
  std::string name;
  std::string description;
  nlohmann::json input_schema = nlohmann::json::object();
};

/// Built-in poisoning detector names. Rule ids are "builtin.poison.<name>".
namespace detector {
inline constexpr std::string_view kInjectionPhrase = "injection_phrase";
inline constexpr std::string_view kInvisibleChars = "invisible_chars";
inline constexpr std::string_view kHiddenComment = "hidden_comment";
inline constexpr std::string_view kCrossToolReference = "cross_tool_reference";
inline constexpr std::string_view kOversizedDescription = "oversized_description";

inline constexpr std::array<std::string_view, 5> kAll = {
    kInjectionPhrase, kInvisibleChars, kHiddenComment, kCrossToolReference, kOversizedDescription};
}  // namespace detector

inline constexpr std::size_t kMaxDescriptionChars = 4096;
inline constexpr std::size_t kMaxExcerptBytes = 256;

struct Finding {
  std::string tool_name;
  std::string detector;
  std::string rule_id;
  std::string excerpt;

  bool operator==(const Finding&) const = default;
};

/// Per-tool, per-detector findings in tool order then detector order.
std::vector<Finding> scan_tool_descriptions(std::span<const ToolDescriptor> tools);

/// Extracts tools from a tools/list result ({"tools": [...]}) or a bare array.
std::vector<ToolDescriptor> tools_from_json(const nlohmann::json& j);

/// Printable, credential-free, at most kMaxExcerptBytes. Control and
/// invisible code points are shown as \u{XXXX}.
std::string make_excerpt(std::string_view text, std::size_t begin = 0,
                         std::size_t end = std::string_view::npos);

bool is_invisible_code_point(char32_t cp);

}  // namespace mcpgw::inspect
