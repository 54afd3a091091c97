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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcpgw::inspect {

inline constexpr std::size_t kMaxMessageBytes = 1u << 20;

enum class Direction { client_to_server, server_to_client };
enum class MessageKind { request, response, notification };

const char* to_string(MessageKind k);

struct McpMessage {
  nlohmann::json parsed;
  Direction direction = Direction::client_to_server;
  MessageKind kind = MessageKind::request;
  std::string method;  // empty for responses
  std::optional<nlohmann::json> id;
};

/// Machine-readable codes: not_json, bad_envelope, unknown_method, oversize.
struct Violation {
  std::string code;
  std::string detail;
};

struct ValidationResult {
  /// One entry per message; a JSON-RPC batch yields several.
  std::vector<McpMessage> messages;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Method names accepted per direction. Entries ending in "/*" match any
/// method under that prefix.
struct MethodAllowlist {
  std::vector<std::string> client_to_server = {
      "initialize",     "tools/list",  "tools/call",  "resources/list", "resources/read",
      "prompts/list",   "prompts/get", "ping",        "notifications/*"};
  std::vector<std::string> server_to_client = {"ping", "sampling/createMessage", "roots/list",
                                               "notifications/*"};

  bool allows(Direction d, std::string_view method) const;
};

ValidationResult validate_mcp_message(std::string_view body, Direction direction,
                                      const MethodAllowlist& allowlist = {});

}  // namespace mcpgw::inspect
