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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/http.h"
#include "mcpgw/common/model.h"

namespace mcpgw::gateway {

/// What a middleware sees. The request itself is never modified by the
/// chain; identity travels in `claims` and in the merged mutations.
struct ExchangeContext {
  const HttpExchange& req;
  const RouteConfig& route;
  std::optional<Claims> claims;
};

/// Sees upstream output before the client does. Returning the input
/// unchanged keeps the stream byte-identical.
class ResponseFilter {
 public:
  virtual ~ResponseFilter() = default;
  /// One complete SSE frame including its terminating blank line. An empty
  /// result drops the frame.
  virtual std::string on_sse_frame(std::string frame) = 0;
  /// A complete non-streamed body.
  virtual std::string on_body(std::string body, std::string_view content_type) = 0;
};

class Middleware {
 public:
  explicit Middleware(std::string id) : id_(std::move(id)) {}
  virtual ~Middleware() = default;

  const std::string& id() const { return id_; }
  virtual std::string_view type() const = 0;
  /// May throw; run_chain turns that into a 500.
  virtual Decision handle(ExchangeContext& ctx) = 0;
  /// Called only when the chain ended in Continue.
  virtual std::unique_ptr<ResponseFilter> response_filter(const ExchangeContext& ctx) {
    return nullptr;
  }

 private:
  std::string id_;
};

struct ChainResult {
  Decision decision;
  /// Ids in execution order: exactly the prefix up to and including the
  /// middleware that short-circuited.
  std::vector<std::string> executed;
  /// Set when a middleware threw.
  std::optional<std::string> error;

  const std::string* decided_by() const {
    return std::holds_alternative<ShortCircuit>(decision) && !executed.empty() ? &executed.back()
                                                                               : nullptr;
  }
};

/// Runs in declared order and halts at the first ShortCircuit. Mutations
/// merge by header name, a later one replacing an earlier one. A throwing
/// middleware yields ShortCircuit(500) plus, when `audit` is set, an
/// exchange record with outcome=error.
ChainResult run_chain(std::span<Middleware* const> chain, ExchangeContext& ctx,
                      audit::AuditSink* audit = nullptr);

/// Applies add-or-replace mutations onto `headers`.
void apply_mutations(Headers& headers,
                     const std::vector<std::pair<std::string, std::string>>& mutations);

}  // namespace mcpgw::gateway
