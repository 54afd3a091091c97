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

#include "mcpgw/inspect/tool_scanner.h"

#include <cctype>
#include <cstdio>
#include <optional>

#include "mcpgw/common/redact.h"

namespace mcpgw::inspect {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

/// Lenient decoder: an invalid byte becomes U+FFFD of length 1.
std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto b = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    auto cont = [&](std::size_t k) {
      return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0 && cont(1)) {
      cp = ((b & 0x1F) << 6) | (s[i + 1] & 0x3F);
      len = 2;
      if (cp < 0x80) cp = 0xFFFD;
    } else if ((b & 0xF0) == 0xE0 && cont(1) && cont(2)) {
      cp = ((b & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
      len = 3;
      if (cp < 0x800) cp = 0xFFFD;
    } else if ((b & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
      cp = ((b & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) |
           (s[i + 3] & 0x3F);
      len = 4;
      if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

std::string lower_collapsed(std::string_view s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

constexpr std::string_view kInjectionPhrases[] = {
    "ignore previous instructions",
    "ignore all previous instructions",
    "ignore prior instructions",
    "ignore all prior instructions",
    "ignore the above instructions",
    "disregard previous instructions",
    "disregard all previous instructions",
    "forget previous instructions",
    "forget all previous instructions",
    "do not tell the user",
    "don't tell the user",
    "do not inform the user",
    "without telling the user",
    "never tell the user",
    "hide this from the user",
    "<important>",
    "</important>",
    "<system>",
    "</system>",
};

std::optional<std::size_t> find_ci(std::string_view hay, std::string_view needle) {
  if (needle.empty() || hay.size() < needle.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool eq = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(hay[i + k])) !=
          std::tolower(static_cast<unsigned char>(needle[k]))) {
        eq = false;
        break;
      }
    }
    if (eq) return i;
  }
  return std::nullopt;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::optional<std::size_t> find_name(std::string_view hay, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = hay.find(name, pos)) != std::string_view::npos) {
    bool left = pos == 0 || !is_name_char(hay[pos - 1]);
    std::size_t end = pos + name.size();
    bool right = end >= hay.size() || !is_name_char(hay[end]);
    if (left && right) return pos;
    ++pos;
  }
  return std::nullopt;
}

void collect_schema_descriptions(const nlohmann::json& j, std::string& out, int depth = 0) {
  if (depth > 16) return;
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      if ((k == "description" || k == "title") && v.is_string()) {
        out.push_back('\n');
        out += v.get<std::string>();
      } else {
        collect_schema_descriptions(v, out, depth + 1);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_schema_descriptions(v, out, depth + 1);
  }
}

Finding finding(const ToolDescriptor& tool, std::string_view det, std::string excerpt) {
  return Finding{tool.name, std::string(det), "builtin.poison." + std::string(det),
                 std::move(excerpt)};
}

}  // namespace

bool is_invisible_code_point(char32_t cp) {
  return (cp >= 0x200B && cp <= 0x200F) || (cp >= 0x202A && cp <= 0x202E) ||
         (cp >= 0x2060 && cp <= 0x2064) || (cp >= 0x2066 && cp <= 0x2069) || cp == 0xFEFF ||
         cp == 0x00AD || cp == 0x180E || cp == 0x034F || (cp >= 0xFFF9 && cp <= 0xFFFB) ||
         (cp >= 0xE0000 && cp <= 0xE007F);
}

std::string make_excerpt(std::string_view text, std::size_t begin, std::size_t end) {
  constexpr std::size_t kContext = 48;
  if (end == std::string_view::npos || end > text.size()) end = text.size();
  if (begin > end) begin = end;
  std::size_t from = begin > kContext ? begin - kContext : 0;
  std::size_t to = std::min(text.size(), end + kContext);
  // Snap to code point boundaries.
  while (from > 0 && (static_cast<unsigned char>(text[from]) & 0xC0) == 0x80) --from;
  while (to < text.size() && (static_cast<unsigned char>(text[to]) & 0xC0) == 0x80) ++to;

  // Spans come from the whole text so a secret straddling the window edge
  // is still recognised.
  auto spans = secret_spans(text);
  auto span_at = [&](std::size_t pos) -> const std::pair<std::size_t, std::size_t>* {
    for (const auto& s : spans) {
      if (pos >= s.first && pos < s.second) return &s;
    }
    return nullptr;
  };

  std::string sanitized;
  const std::pair<std::size_t, std::size_t>* open_span = nullptr;
  for (const auto& cp : decode_utf8(text.substr(from, to - from))) {
    if (auto* s = span_at(from + cp.offset)) {
      if (s != open_span) sanitized += kRedacted;
      open_span = s;
      continue;
    }
    open_span = nullptr;
    if (cp.value < 0x20 || cp.value == 0x7F || is_invisible_code_point(cp.value) ||
        cp.value == 0xFFFD) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "\\u{%04X}", static_cast<unsigned>(cp.value));
      sanitized += buf;
    } else {
      sanitized.append(text.substr(from + cp.offset, cp.length));
    }
  }
  auto redacted = redact_secrets(sanitized);
  if (redacted.size() > kMaxExcerptBytes) {
    std::size_t cut = kMaxExcerptBytes;
    while (cut > 0 && (static_cast<unsigned char>(redacted[cut]) & 0xC0) == 0x80) --cut;
    redacted.resize(cut);
  }
  return redacted;
}

std::vector<Finding> scan_tool_descriptions(std::span<const ToolDescriptor> tools) {
  std::vector<Finding> out;
  for (const auto& tool : tools) {
    std::string text = tool.description;
    collect_schema_descriptions(tool.input_schema, text);

    // (a) instruction-injection phrases, over whitespace-collapsed lowercase.
    {
      auto norm = lower_collapsed(text);
      for (auto phrase : kInjectionPhrases) {
        if (auto pos = norm.find(phrase); pos != std::string::npos) {
          out.push_back(finding(tool, detector::kInjectionPhrase,
                                make_excerpt(norm, pos, pos + phrase.size())));
          break;
        }
      }
    }

    // (b) zero-width, bidi-override and tag code points.
    for (const auto& cp : decode_utf8(text)) {
      if (is_invisible_code_point(cp.value)) {
        out.push_back(finding(tool, detector::kInvisibleChars,
                              make_excerpt(text, cp.offset, cp.offset + cp.length)));
        break;
      }
    }

    // (c) HTML or markdown comments.
    {
      std::optional<std::size_t> pos = find_ci(text, "<!--");
      if (!pos) pos = find_ci(text, "[//]:");
      if (!pos) pos = find_ci(text, "[comment]:");
      if (pos) {
        out.push_back(finding(tool, detector::kHiddenComment, make_excerpt(text, *pos, *pos + 4)));
      }
    }

    // (d) mentions of another tool in the same list.
    for (const auto& other : tools) {
      if (&other == &tool || other.name == tool.name || other.name.size() < 3) continue;
      if (auto pos = find_name(text, other.name)) {
        out.push_back(finding(tool, detector::kCrossToolReference,
                              make_excerpt(text, *pos, *pos + other.name.size())));
        break;
      }
    }

    // (e) length in code points.
    if (decode_utf8(tool.description).size() > kMaxDescriptionChars) {
      out.push_back(finding(tool, detector::kOversizedDescription,
                            make_excerpt(tool.description, 0, 0)));
    }
  }
  return out;
}

std::vector<ToolDescriptor> tools_from_json(const nlohmann::json& j) {
  const nlohmann::json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("tools") && j["tools"].is_array()) {
    arr = &j["tools"];
  }
  std::vector<ToolDescriptor> out;
  if (!arr) return out;
  for (const auto& t : *arr) {
    if (!t.is_object()) continue;
    ToolDescriptor d;
    d.name = t.value("name", "");
    d.description = t.contains("description") && t["description"].is_string()
                        ? t["description"].get<std::string>()
                        : "";
    if (t.contains("inputSchema")) d.input_schema = t["inputSchema"];
    else if (t.contains("input_schema")) d.input_schema = t["input_schema"];
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace mcpgw::inspect
