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

#include "mcpgw/gateway/middleware.h"

#include <exception>

namespace mcpgw::gateway {

namespace {

void merge(std::vector<std::pair<std::string, std::string>>& into,
           const std::vector<std::pair<std::string, std::string>>& from) {
  for (const auto& m : from) {
    bool replaced = false;
    for (auto& existing : into) {
      if (iequals(existing.first, m.first)) {
        existing.second = m.second;
        replaced = true;
        break;
      }
    }
    if (!replaced) into.push_back(m);
  }
}

}  // namespace

ChainResult run_chain(std::span<Middleware* const> chain, ExchangeContext& ctx,
                      audit::AuditSink* audit) {
  ChainResult out{Continue{}, {}, std::nullopt};
  Continue merged;
  for (Middleware* m : chain) {
    out.executed.push_back(m->id());
    Decision d;
    try {
      d = m->handle(ctx);
    } catch (const std::exception& e) {
      out.error = e.what();
    } catch (...) {
      out.error = "unknown exception";
    }
    if (out.error) {
      if (audit) {
        audit->append(audit::Kind::exchange, {{"outcome", "error"},
                                              {"route", ctx.route.id},
                                              {"middleware", m->id()},
                                              {"method", ctx.req.method},
                                              {"host", ctx.req.host},
                                              {"path", ctx.req.path},
                                              {"status", "500"},
                                              {"error", *out.error}});
      }
      out.decision = short_circuit(500, "internal error\n");
      return out;
    }
    if (auto* sc = std::get_if<ShortCircuit>(&d)) {
      out.decision = std::move(*sc);
      return out;
    }
    merge(merged.header_mutations, std::get<Continue>(d).header_mutations);
  }
  out.decision = std::move(merged);
  return out;
}

void apply_mutations(Headers& headers,
                     const std::vector<std::pair<std::string, std::string>>& mutations) {
  for (const auto& [name, value] : mutations) headers.set(name, value);
}

}  // namespace mcpgw::gateway
