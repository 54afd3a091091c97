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

#include "mcpgw/common/redact.h"

#include <array>
#include <cctype>

#include "mcpgw/common/http.h"
#include "mcpgw/common/model.h"

namespace mcpgw {

const char* to_string(HealthState s) {
  switch (s) {
    case HealthState::healthy: return "healthy";
    case HealthState::unhealthy: return "unhealthy";
    case HealthState::unknown: break;
  }
  return "unknown";
}

namespace {

constexpr std::array<std::string_view, 12> kSensitiveKeys = {
    "access_token", "code",     "code_verifier", "client_secret", "password", "refresh_token",
    "api_key",      "x-admin-key", "authorization", "token",      "session",  "secret"};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_handle_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_value_end(char c) {
  return c == '&' || c == '"' || c == '\'' || c == ',' || c == ';' || c == '}' || c == ']' ||
         std::isspace(static_cast<unsigned char>(c));
}

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view needle) {
  return pos + needle.size() <= text.size() && iequals(text.substr(pos, needle.size()), needle);
}

}  // namespace

bool is_sensitive_key(std::string_view key) {
  for (auto k : kSensitiveKeys) {
    if (iequals(k, key)) return true;
  }
  return false;
}

std::vector<std::pair<std::size_t, std::size_t>> secret_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    bool boundary = i == 0 || !is_word_char(text[i - 1]);

    // Bearer <value>; no boundary required, over-redaction is harmless.
    if (starts_with_ci(text, i, "bearer") && i + 6 < text.size() &&
        std::isspace(static_cast<unsigned char>(text[i + 6]))) {
      std::size_t j = i + 6;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      std::size_t k = j;
      while (k < text.size() && !is_value_end(text[k])) ++k;
      if (k > j) {
        spans.emplace_back(j, k);
        i = k;
        continue;
      }
    }

    // Gateway-minted handles.
    bool matched_handle = false;
    for (auto prefix : {kAccessTokenPrefix, kAuthCodePrefix, kSessionPrefix}) {
      if (boundary && text.substr(i).starts_with(prefix)) {
        std::size_t k = i + prefix.size();
        while (k < text.size() && is_handle_char(text[k])) ++k;
        spans.emplace_back(i, k);
        i = k;
        matched_handle = true;
        break;
      }
    }
    if (matched_handle) continue;

    // key=value, "key":"value", key: value
    if (boundary) {
      bool matched_key = false;
      for (auto key : kSensitiveKeys) {
        if (!starts_with_ci(text, i, key)) continue;
        std::size_t j = i + key.size();
        if (j < text.size() && is_word_char(text[j])) continue;
        std::size_t sep = j;
        if (sep < text.size() && (text[sep] == '"' || text[sep] == '\'')) ++sep;
        while (sep < text.size() && text[sep] == ' ') ++sep;
        if (sep >= text.size() || (text[sep] != '=' && text[sep] != ':')) continue;
        ++sep;
        while (sep < text.size() && text[sep] == ' ') ++sep;
        bool quoted = sep < text.size() && (text[sep] == '"' || text[sep] == '\'');
        std::size_t vstart = quoted ? sep + 1 : sep;
        std::size_t vend = vstart;
        while (vend < text.size() && !is_value_end(text[vend])) ++vend;
        if (vend == vstart) continue;
        auto value = text.substr(vstart, vend - vstart);
        // JSON-RPC error codes are integers, not secrets.
        bool numeric = !quoted && value.find_first_not_of("-0123456789") == std::string_view::npos;
        if (numeric) continue;
        spans.emplace_back(vstart, vend);
        i = vend;
        matched_key = true;
        break;
      }
      if (matched_key) continue;
    }

    ++i;
  }
  return spans;
}

std::string redact_secrets(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (auto [begin, end] : secret_spans(text)) {
    out.append(text.substr(pos, begin - pos));
    out.append(kRedacted);
    pos = end;
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace mcpgw
