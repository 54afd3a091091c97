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

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "mcpgw/common/model.h"

namespace httplib {
class Client;
}

namespace mcpgw::config {

struct UpstreamTimeouts {
  std::chrono::milliseconds connect{2000};
  std::chrono::milliseconds read{3600 * 1000};
};

/// How the gateway reaches a backend. Direct HTTP is the only shipped
/// implementation; an encrypted tunnel would be another.
class UpstreamConnector {
 public:
  virtual ~UpstreamConnector() = default;

  /// nullptr when the backend's upstream_url cannot be used.
  virtual std::unique_ptr<httplib::Client> open(const BackendServer& backend,
                                                const UpstreamTimeouts& timeouts) const = 0;

  /// Path prefix from upstream_url, without a trailing slash ("" for "/").
  virtual std::string base_path(const BackendServer& backend) const = 0;
};

class DirectConnector final : public UpstreamConnector {
 public:
  std::unique_ptr<httplib::Client> open(const BackendServer& backend,
                                        const UpstreamTimeouts& timeouts) const override;
  std::string base_path(const BackendServer& backend) const override;
};

}  // namespace mcpgw::config
