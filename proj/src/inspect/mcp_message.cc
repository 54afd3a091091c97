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

#include "mcpgw/inspect/mcp_message.h"

#include <algorithm>
#include <array>

namespace mcpgw::inspect {

using nlohmann::json;

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::request: return "request";
    case MessageKind::response: return "response";
    case MessageKind::notification: return "notification";
  }
  return "request";
}

bool MethodAllowlist::allows(Direction d, std::string_view method) const {
  const auto& list = d == Direction::client_to_server ? client_to_server : server_to_client;
  return std::any_of(list.begin(), list.end(), [&](const std::string& entry) {
    if (entry.ends_with("/*")) {
      auto prefix = std::string_view(entry).substr(0, entry.size() - 1);
      return method.size() > prefix.size() && method.starts_with(prefix);
    }
    return entry == method;
  });
}

namespace {

constexpr std::array<std::string_view, 6> kEnvelopeMembers = {"jsonrpc", "id",     "method",
                                                              "params",  "result", "error"};

bool valid_id(const json& id, bool allow_null) {
  if (id.is_null()) return allow_null;
  return id.is_string() || id.is_number_integer();
}

bool requires_string_param(const json& params, const char* name) {
  return params.is_object() && params.contains(name) && params[name].is_string() &&
         !params[name].get_ref<const std::string&>().empty();
}

void validate_one(const json& j, Direction direction, const MethodAllowlist& allowlist,
                  ValidationResult& out) {
  auto bad = [&](std::string detail) { out.violations.push_back({"bad_envelope", std::move(detail)}); };

  if (!j.is_object()) return bad("message is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kEnvelopeMembers.begin(), kEnvelopeMembers.end(), key) == kEnvelopeMembers.end()) {
      return bad("unexpected member '" + key + "'");
    }
  }
  if (!j.contains("jsonrpc") || !j["jsonrpc"].is_string() || j["jsonrpc"].get<std::string>() != "2.0") {
    return bad("jsonrpc must be exactly \"2.0\"");
  }

  McpMessage msg;
  msg.parsed = j;
  msg.direction = direction;
  if (j.contains("id")) msg.id = j["id"];

  if (j.contains("method")) {
    if (!j["method"].is_string() || j["method"].get_ref<const std::string&>().empty()) {
      return bad("method must be a non-empty string");
    }
    if (j.contains("result") || j.contains("error")) return bad("request carries result/error");
    msg.method = j["method"].get<std::string>();
    const bool is_notification_method = msg.method.starts_with("notifications/");
    if (msg.id) {
      if (!valid_id(*msg.id, false)) return bad("id must be a string or integer");
      if (is_notification_method) return bad("notification must not carry an id");
      msg.kind = MessageKind::request;
    } else {
      if (!is_notification_method) return bad("request is missing its id");
      msg.kind = MessageKind::notification;
    }
    const json* params = j.contains("params") ? &j["params"] : nullptr;
    if (params && !params->is_object() && !params->is_array()) {
      return bad("params must be an object or array");
    }
    if (!allowlist.allows(direction, msg.method)) {
      out.violations.push_back({"unknown_method", "method '" + msg.method + "' is not allowed"});
      return;
    }
    static const json kEmpty = json::object();
    const json& p = params ? *params : kEmpty;
    if ((msg.method == "tools/call" || msg.method == "prompts/get") && !requires_string_param(p, "name")) {
      return bad(msg.method + " requires params.name");
    }
    if (msg.method == "resources/read" && !requires_string_param(p, "uri")) {
      return bad("resources/read requires params.uri");
    }
  } else {
    if (!msg.id) return bad("response is missing its id");
    const bool has_result = j.contains("result");
    const bool has_error = j.contains("error");
    if (has_result == has_error) return bad("response needs exactly one of result/error");
    if (!valid_id(*msg.id, has_error)) return bad("id must be a string or integer");
    if (j.contains("params")) return bad("response carries params");
    if (has_error) {
      const auto& e = j["error"];
      if (!e.is_object() || !e.contains("code") || !e["code"].is_number_integer() ||
          !e.contains("message") || !e["message"].is_string()) {
        return bad("error must have integer code and string message");
      }
    }
    msg.kind = MessageKind::response;
  }
  out.messages.push_back(std::move(msg));
}

}  // namespace

ValidationResult validate_mcp_message(std::string_view body, Direction direction,
                                      const MethodAllowlist& allowlist) {
  ValidationResult out;
  if (body.size() > kMaxMessageBytes) {
    out.violations.push_back({"oversize", "body exceeds " + std::to_string(kMaxMessageBytes) + " bytes"});
    return out;
  }
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    out.violations.push_back({"not_json", "body is not valid JSON"});
    return out;
  }
  if (j.is_array()) {
    if (j.empty()) {
      out.violations.push_back({"bad_envelope", "empty batch"});
      return out;
    }
    for (const auto& item : j) validate_one(item, direction, allowlist, out);
  } else {
    validate_one(j, direction, allowlist, out);
  }
  if (!out.ok()) out.messages.clear();
  return out;
}

}  // namespace mcpgw::inspect
