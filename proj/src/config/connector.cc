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

#include "mcpgw/config/connector.h"

#include <httplib.h>

#include "mcpgw/common/http.h"

namespace mcpgw::config {

std::unique_ptr<httplib::Client> DirectConnector::open(const BackendServer& backend,
                                                       const UpstreamTimeouts& timeouts) const {
  auto url = parse_url(backend.upstream_url);
  if (!url || !url->userinfo.empty()) return nullptr;
  if (url->scheme != "http" && url->scheme != "https") return nullptr;
  std::string host = url->host.find(':') != std::string::npos ? "[" + url->host + "]" : url->host;
  auto client = std::make_unique<httplib::Client>(url->scheme + "://" + host + ":" +
                                                  std::to_string(url->effective_port()));
  if (!client->is_valid()) return nullptr;
  auto secs = [](std::chrono::milliseconds ms) {
    return std::pair<time_t, time_t>(ms.count() / 1000, (ms.count() % 1000) * 1000);
  };
  auto [cs, cus] = secs(timeouts.connect);
  auto [rs, rus] = secs(timeouts.read);
  client->set_connection_timeout(cs, cus);
  client->set_read_timeout(rs, rus);
  client->set_write_timeout(rs, rus);
  client->set_keep_alive(false);
  // Redirects from a backend are relayed, never followed.
  client->set_follow_location(false);
  return client;
}

std::string DirectConnector::base_path(const BackendServer& backend) const {
  auto url = parse_url(backend.upstream_url);
  if (!url) return {};
  std::string p = url->path;
  while (!p.empty() && p.back() == '/') p.pop_back();
  return p;
}

}  // namespace mcpgw::config
