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

#include <string>
#include <string_view>
#include <vector>

namespace mcpgw::gateway {

/// Splits a byte stream into SSE frames without altering a byte: the
/// concatenation of everything returned equals everything fed.
class SseFramer {
 public:
  /// Complete frames, each ending with its blank line.
  std::vector<std::string> feed(std::string_view chunk);
  /// Whatever is left once the stream has ended.
  std::string flush();
  bool empty() const { return buffer_.empty(); }

 private:
  std::string buffer_;
  std::size_t scan_ = 0;
  bool line_empty_ = true;
};

struct SseEvent {
  std::string event = "message";
  std::string data;
  std::string id;
  bool has_data = false;
};

/// Field parsing per the event-stream format; comments and unknown fields
/// are ignored.
SseEvent parse_sse_frame(std::string_view frame);

/// "event: <event>\n" (omitted for "message"), optional "id:", one "data:"
/// line per data line, then the blank line.
std::string format_sse_frame(const SseEvent& e);

}  // namespace mcpgw::gateway
