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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mcpgw/common/clock.h"

namespace mcpgw {

bool iequals(std::string_view a, std::string_view b);
std::string to_lower(std::string_view s);

/// Ordered multimap with case-insensitive names. Insertion order is kept so
/// forwarded requests look like what the client sent.
class Headers {
 public:
  using Entry = std::pair<std::string, std::string>;

  Headers() = default;
  Headers(std::initializer_list<Entry> init) : entries_(init) {}

  void add(std::string name, std::string value);
  /// Replaces every existing value of `name`.
  void set(std::string name, std::string value);
  void remove(std::string_view name);

  std::optional<std::string> get(std::string_view name) const;
  std::vector<std::string> get_all(std::string_view name) const;
  bool contains(std::string_view name) const { return get(name).has_value(); }
  std::size_t count(std::string_view name) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const Headers&) const = default;

 private:
  std::vector<Entry> entries_;
};

struct PeerAddress {
  std::string ip;
  int port = 0;
};

/// One inbound request after parsing. `host` has no port and is lowercase;
/// `path` is normalized and percent-decoded; `query` is the raw query string.
struct HttpExchange {
  std::string method;
  std::string host;
  std::string path;
  std::string query;
  Headers headers;
  std::string body;
  PeerAddress peer;
  MonoTime received_at{};
  bool tls = false;
};

struct HttpResponse {
  int status = 200;
  Headers headers;
  std::string body;
};

struct Continue {
  std::vector<std::pair<std::string, std::string>> header_mutations;
};

struct ShortCircuit {
  HttpResponse response;
};

using Decision = std::variant<Continue, ShortCircuit>;

inline bool is_continue(const Decision& d) { return std::holds_alternative<Continue>(d); }

ShortCircuit short_circuit(int status, std::string body = {},
                           std::string content_type = "text/plain; charset=utf-8");

/// Resolves "." and ".." segments and collapses empty ones. nullopt when the
/// path is not absolute or climbs above the root.
std::optional<std::string> normalize_path(std::string_view path);

/// Lowercases and strips the port. nullopt for empty or malformed hosts.
std::optional<std::string> normalize_host(std::string_view host_header);

bool is_hop_by_hop(std::string_view header_name);

bool is_loopback_host(std::string_view host);

struct Url {
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::optional<int> port;
  std::string path;
  std::string query;
  std::string fragment;
  bool has_fragment = false;

  /// scheme://host[:port]
  std::string origin() const;
  int effective_port() const;
};

/// Absolute URLs only (scheme "://" authority). IPv6 literals keep their
/// brackets stripped in `host`.
std::optional<Url> parse_url(std::string_view text);

std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s, bool plus_as_space = false);

using ParamMap = std::map<std::string, std::string>;

/// application/x-www-form-urlencoded and query strings. Repeated names keep
/// the first value and are reported through `duplicates`.
ParamMap parse_params(std::string_view text, std::vector<std::string>* duplicates = nullptr);
std::string encode_params(const std::vector<std::pair<std::string, std::string>>& params);

std::string status_reason(int status);

}  // namespace mcpgw
