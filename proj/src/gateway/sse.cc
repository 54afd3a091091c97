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

#include "mcpgw/gateway/sse.h"

namespace mcpgw::gateway {

std::vector<std::string> SseFramer::feed(std::string_view chunk) {
  buffer_.append(chunk);
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = scan_;
  while (i < buffer_.size()) {
    char c = buffer_[i];
    if (c != '\n' && c != '\r') {
      line_empty_ = false;
      ++i;
      continue;
    }
    if (c == '\r') {
      // CR at the very end may be the first half of CRLF; decide later.
      if (i + 1 == buffer_.size()) break;
      if (buffer_[i + 1] == '\n') ++i;
    }
    ++i;
    if (line_empty_) {
      out.push_back(buffer_.substr(start, i - start));
      start = i;
    }
    line_empty_ = true;
  }
  buffer_.erase(0, start);
  scan_ = i - start;
  return out;
}

std::string SseFramer::flush() {
  std::string rest = std::move(buffer_);
  buffer_.clear();
  scan_ = 0;
  line_empty_ = true;
  return rest;
}

SseEvent parse_sse_frame(std::string_view frame) {
  SseEvent e;
  std::size_t pos = 0;
  while (pos < frame.size()) {
    auto end = frame.find_first_of("\r\n", pos);
    if (end == std::string_view::npos) end = frame.size();
    auto line = frame.substr(pos, end - pos);
    pos = end;
    if (pos < frame.size() && frame[pos] == '\r') ++pos;
    if (pos < frame.size() && frame[pos] == '\n' && (pos == end || frame[pos - 1] == '\r')) ++pos;
    if (line.empty() || line.front() == ':') continue;
    auto colon = line.find(':');
    auto field = line.substr(0, colon);
    std::string_view value;
    if (colon != std::string_view::npos) {
      value = line.substr(colon + 1);
      if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    }
    if (field == "event") {
      e.event = std::string(value);
    } else if (field == "data") {
      if (e.has_data) e.data.push_back('\n');
      e.data.append(value);
      e.has_data = true;
    } else if (field == "id") {
      e.id = std::string(value);
    }
  }
  if (e.event.empty()) e.event = "message";
  return e;
}

std::string format_sse_frame(const SseEvent& e) {
  std::string out;
  if (e.event != "message") out += "event: " + e.event + "\n";
  if (!e.id.empty()) out += "id: " + e.id + "\n";
  std::size_t pos = 0;
  do {
    auto nl = e.data.find('\n', pos);
    out += "data: " + e.data.substr(pos, nl == std::string::npos ? nl : nl - pos) + "\n";
    pos = nl == std::string::npos ? nl : nl + 1;
  } while (pos != std::string::npos);
  out += "\n";
  return out;
}

}  // namespace mcpgw::gateway
