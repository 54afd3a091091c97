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

#include "mcpgw/gateway/middlewares.h"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "mcpgw/gateway/sse.h"
#include "mcpgw/inspect/mcp_message.h"
#include "mcpgw/inspect/tool_scanner.h"
#include "mcpgw/oauth/types.h"

namespace mcpgw::gateway {

using nlohmann::json;

namespace {

/// First tools/call target in `body` (single or batch) that `scope` does not
/// cover. Unparseable bodies yield nullopt; protocol checks belong to inspect.
std::optional<std::string> denied_tool(std::string_view body, std::string_view scope) {
  if (body.empty()) return std::nullopt;
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  auto check = [&](const json& m) -> std::optional<std::string> {
    if (!m.is_object() || m.value("method", json()) != "tools/call") return std::nullopt;
    auto params = m.find("params");
    if (params == m.end() || !params->is_object()) return std::nullopt;
    auto name = params->find("name");
    if (name == params->end() || !name->is_string()) return std::nullopt;
    auto n = name->get<std::string>();
    if (oauth::scope_allows_tool(scope, n)) return std::nullopt;
    return n;
  };
  if (!j.is_array()) return check(j);
  for (const auto& m : j) {
    if (auto d = check(m)) return d;
  }
  return std::nullopt;
}

}  // namespace

ForwardAuthMiddleware::ForwardAuthMiddleware(std::string id, config::ForwardAuthSpec spec,
                                             oauth::ForwardAuthenticator* local)
    : Middleware(std::move(id)), spec_(std::move(spec)), auth_(local) {
  if (!spec_.address.empty()) {
    remote_ = std::make_unique<oauth::RemoteForwardAuth>(spec_.address);
    auth_ = remote_.get();
  }
  if (!auth_) throw std::invalid_argument("forward_auth needs an authenticator");
}

Decision ForwardAuthMiddleware::handle(ExchangeContext& ctx) {
  auto result = auth_->check(ctx.req, ctx.route);
  auto* cont = std::get_if<Continue>(&result.decision);
  if (!cont) return result.decision;
  Continue filtered;
  for (auto& m : cont->header_mutations) {
    bool listed = std::any_of(spec_.auth_response_headers.begin(),
                              spec_.auth_response_headers.end(),
                              [&](const std::string& h) { return iequals(h, m.first); });
    if (listed) filtered.header_mutations.push_back(std::move(m));
  }
  if (result.claims) ctx.claims = std::move(result.claims);
  if (ctx.claims) {
    if (auto tool = denied_tool(ctx.req.body, ctx.claims->scope)) {
      auto sc = short_circuit(
          403, inspect::error_json("insufficient_scope", "token scope does not cover tool " + *tool),
          "application/json");
      sc.response.headers.set("WWW-Authenticate",
                              "Bearer error=\"insufficient_scope\", scope=\"" +
                                  std::string(oauth::kToolScopePrefix) + *tool + "\"");
      return sc;
    }
  }
  return filtered;
}

RedirectWellknownMiddleware::RedirectWellknownMiddleware(
    std::string id, std::string oauth_host, bool permanent,
    std::function<std::string(std::string_view)> origin_for)
    : Middleware(std::move(id)),
      oauth_host_(std::move(oauth_host)),
      permanent_(permanent),
      origin_for_(std::move(origin_for)) {
  if (!origin_for_) throw std::invalid_argument("redirect_wellknown needs an origin resolver");
}

Decision RedirectWellknownMiddleware::handle(ExchangeContext& ctx) {
  if (ctx.req.path != oauth::kMetadataPath || ctx.req.host == oauth_host_) return Continue{};
  auto sc = short_circuit(permanent_ ? 308 : 307);
  sc.response.headers.set("Location", origin_for_(oauth_host_) + ctx.req.path);
  return sc;
}

RateLimitMiddleware::RateLimitMiddleware(std::string id, policy::RateLimitSpec spec,
                                         policy::RateLimiter& limiter, const Clock& clock)
    : Middleware(std::move(id)), spec_(spec), limiter_(limiter), clock_(clock) {}

std::string RateLimitMiddleware::key_for(const ExchangeContext& ctx) const {
  switch (spec_.key_by) {
    case policy::RateKey::peer_ip:
      break;
    case policy::RateKey::client_id:
      if (ctx.claims && !ctx.claims->client_id.empty()) return "client:" + ctx.claims->client_id;
      break;
    case policy::RateKey::subject:
      if (ctx.claims && !ctx.claims->subject.empty()) return "subject:" + ctx.claims->subject;
      break;
  }
  return "ip:" + ctx.req.peer.ip;
}

Decision RateLimitMiddleware::handle(ExchangeContext& ctx) {
  auto d = limiter_.check(id(), key_for(ctx), spec_, clock_.mono_now());
  if (d.allowed) return Continue{};
  auto sc = short_circuit(429, inspect::error_json("rate_limited", "too many requests"),
                          "application/json");
  sc.response.headers.set("Retry-After", policy::format_retry_after(d.retry_after));
  return sc;
}

BanCheckMiddleware::BanCheckMiddleware(std::string id, policy::BanStore& bans,
                                       const Clock& clock)
    : Middleware(std::move(id)), bans_(bans), clock_(clock) {}

HttpResponse banned_response(const policy::BanEntry& ban, WallTime now) {
  auto left = std::chrono::duration_cast<std::chrono::seconds>(ban.expires_at - now).count();
  auto sc = short_circuit(403, inspect::error_json("forbidden", "caller is banned"),
                          "application/json");
  sc.response.headers.set("Retry-After", std::to_string(std::max<long long>(left, 1)));
  return sc.response;
}

namespace {

std::optional<std::string_view> client_of(const ExchangeContext& ctx) {
  if (ctx.claims && !ctx.claims->client_id.empty()) return ctx.claims->client_id;
  return std::nullopt;
}

}  // namespace

Decision BanCheckMiddleware::handle(ExchangeContext& ctx) {
  auto now = clock_.wall_now();
  if (auto ban = bans_.check(ctx.req.peer.ip, client_of(ctx), now)) {
    return ShortCircuit{banned_response(*ban, now)};
  }
  return Continue{};
}

namespace {

class InspectFilter final : public ResponseFilter {
 public:
  InspectFilter(std::shared_ptr<const inspect::RuleSet> rules, std::string peer_ip,
                std::optional<std::string> client_id, policy::BanStore* bans,
                inspect::DetectionLog* log, const Clock& clock)
      : rules_(std::move(rules)),
        peer_ip_(std::move(peer_ip)),
        client_id_(std::move(client_id)),
        bans_(bans),
        log_(log),
        clock_(clock) {}

  std::string on_sse_frame(std::string frame) override {
    auto ev = parse_sse_frame(frame);
    // The endpoint event and other non-message events carry no JSON-RPC.
    if (ev.event != "message" || !ev.has_data) return frame;
    auto verdict = inspect_message(ev.data);
    if (!verdict) return frame;
    if (verdict->empty()) return {};
    SseEvent out;
    out.id = ev.id;
    out.data = std::move(*verdict);
    out.has_data = true;
    return format_sse_frame(out);
  }

  std::string on_body(std::string body, std::string_view content_type) override {
    if (content_type.find("json") == std::string_view::npos || body.empty()) return body;
    auto verdict = inspect_message(body);
    if (!verdict) return body;
    return *verdict;
  }

 private:
  /// nullopt passes the message; otherwise the replacement, empty to drop.
  std::optional<std::string> inspect_message(std::string_view data) {
    auto validation = inspect::validate_mcp_message(data, inspect::Direction::server_to_client);
    std::vector<inspect::ToolDescriptor> tools;
    json reply_id;
    bool is_response = false;
    for (const auto& m : validation.messages) {
      if (m.kind != inspect::MessageKind::response) continue;
      is_response = true;
      if (m.id) reply_id = *m.id;
      if (m.parsed.contains("result") && m.parsed["result"].is_object() &&
          m.parsed["result"].contains("tools")) {
        auto t = inspect::tools_from_json(m.parsed["result"]);
        tools.insert(tools.end(), t.begin(), t.end());
      }
    }
    auto findings = inspect::scan_tool_descriptions(tools);
    inspect::InspectionContext ctx{peer_ip_,  client_id_, data, {}, validation.violations,
                                   findings, tools};
    auto enf = inspect::enforce(*rules_, ctx, bans_, log_, clock_);
    if (!enf.response) return std::nullopt;
    if (!is_response || reply_id.is_null()) return std::string();
    std::vector<std::string> ids;
    for (const auto& e : enf.result.events) {
      if (e.action_taken >= inspect::ActionKind::deny) ids.push_back(e.rule_id);
    }
    json err = {{"jsonrpc", "2.0"},
                {"id", reply_id},
                {"error",
                 {{"code", kBlockedByInspection},
                  {"message", "response blocked by gateway inspection"},
                  {"data", {{"rules", ids}}}}}};
    return err.dump();
  }

  std::shared_ptr<const inspect::RuleSet> rules_;
  std::string peer_ip_;
  std::optional<std::string> client_id_;
  policy::BanStore* bans_;
  inspect::DetectionLog* log_;
  const Clock& clock_;
};

}  // namespace

std::unique_ptr<ResponseFilter> make_inspect_filter(
    std::shared_ptr<const inspect::RuleSet> rules, std::string peer_ip,
    std::optional<std::string> client_id, policy::BanStore* bans, inspect::DetectionLog* log,
    const Clock& clock) {
  return std::make_unique<InspectFilter>(std::move(rules), std::move(peer_ip),
                                         std::move(client_id), bans, log, clock);
}

InspectMiddleware::InspectMiddleware(std::string id, config::InspectSpec spec,
                                     inspect::RuleSet rules, policy::BanStore* bans,
                                     inspect::DetectionLog* log, const Clock& clock)
    : Middleware(std::move(id)),
      spec_(std::move(spec)),
      rules_(std::make_shared<const inspect::RuleSet>(
          spec_.rules.empty() ? std::move(rules) : rules.restricted_to(spec_.rules))),
      bans_(bans),
      log_(log),
      clock_(clock) {}

Decision InspectMiddleware::handle(ExchangeContext& ctx) {
  auto now = clock_.wall_now();
  auto client = client_of(ctx);
  if (bans_) {
    if (auto ban = bans_->check(ctx.req.peer.ip, client, now)) {
      return ShortCircuit{banned_response(*ban, now)};
    }
  }
  inspect::ValidationResult validation;
  if (!ctx.req.body.empty()) {
    validation =
        inspect::validate_mcp_message(ctx.req.body, inspect::Direction::client_to_server);
  }
  std::string traffic = ctx.req.method + " " + ctx.req.path;
  if (!ctx.req.query.empty()) traffic += "?" + ctx.req.query;
  inspect::InspectionContext ictx{ctx.req.peer.ip,
                                  client ? std::optional<std::string>(*client) : std::nullopt,
                                  ctx.req.body,
                                  traffic,
                                  validation.violations,
                                  {},
                                  {}};
  auto enf = inspect::enforce(*rules_, ictx, bans_, log_, clock_);
  if (enf.response) return *enf.response;
  return Continue{};
}

std::unique_ptr<ResponseFilter> InspectMiddleware::response_filter(const ExchangeContext& ctx) {
  if (!spec_.inspect_responses) return nullptr;
  auto client = client_of(ctx);
  return make_inspect_filter(rules_, ctx.req.peer.ip,
                             client ? std::optional<std::string>(*client) : std::nullopt, bans_,
                             log_, clock_);
}

std::unique_ptr<Middleware> make_middleware(const config::MiddlewareSpec& spec,
                                            const inspect::RuleSet& rules,
                                            const MiddlewareServices& s) {
  const Clock& clock = *s.clock;
  return std::visit(
      [&](const auto& k) -> std::unique_ptr<Middleware> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, config::ForwardAuthSpec>) {
          return std::make_unique<ForwardAuthMiddleware>(spec.id, k, s.local_auth);
        } else if constexpr (std::is_same_v<T, config::RedirectWellknownSpec>) {
          return std::make_unique<RedirectWellknownMiddleware>(
              spec.id, k.oauth_host.empty() ? s.issuer_host : k.oauth_host, k.permanent,
              s.origin_for);
        } else if constexpr (std::is_same_v<T, config::RateLimitMiddlewareSpec>) {
          if (!s.rate_limiter) throw std::invalid_argument("rate_limit needs a limiter");
          return std::make_unique<RateLimitMiddleware>(spec.id, k.limit, *s.rate_limiter, clock);
        } else if constexpr (std::is_same_v<T, config::BanCheckSpec>) {
          if (!s.bans) throw std::invalid_argument("ban_check needs a ban store");
          return std::make_unique<BanCheckMiddleware>(spec.id, *s.bans, clock);
        } else {
          return std::make_unique<InspectMiddleware>(spec.id, k, rules, s.bans, s.detections,
                                                     clock);
        }
      },
      spec.kind);
}

Pipeline::Pipeline(const config::ConfigSnapshot& snapshot, const MiddlewareServices& services) {
  for (const auto& m : snapshot.config().middlewares) {
    by_id_.emplace(m.id, make_middleware(m, snapshot.rules(), services));
  }
}

std::vector<Middleware*> Pipeline::chain(std::span<const std::string> ids) const {
  std::vector<Middleware*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw std::out_of_range("unknown middleware " + id);
    out.push_back(it->second.get());
  }
  return out;
}

}  // namespace mcpgw::gateway
