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

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcpgw/config/config.h"
#include "mcpgw/gateway/middleware.h"
#include "mcpgw/inspect/rules.h"
#include "mcpgw/oauth/forward_auth.h"
#include "mcpgw/policy/ban_store.h"
#include "mcpgw/policy/rate_limiter.h"

namespace mcpgw::gateway {

/// Shared state the built-in middlewares act on. Null members disable the
/// feature that needs them; a chain referencing it then fails closed.
struct MiddlewareServices {
  const Clock* clock = &SystemClock::instance();
  oauth::ForwardAuthenticator* local_auth = nullptr;
  /// Public origin ("https://host") for a host, as clients should see it.
  std::function<std::string(std::string_view host)> origin_for;
  std::string issuer_host;
  policy::RateLimiter* rate_limiter = nullptr;
  policy::BanStore* bans = nullptr;
  inspect::DetectionLog* detections = nullptr;
};

/// Delegates to an authenticator. Only headers listed in
/// auth_response_headers survive into the upstream request.
class ForwardAuthMiddleware final : public Middleware {
 public:
  ForwardAuthMiddleware(std::string id, config::ForwardAuthSpec spec,
                        oauth::ForwardAuthenticator* local);
  std::string_view type() const override { return "forward_auth"; }
  Decision handle(ExchangeContext& ctx) override;

 private:
  config::ForwardAuthSpec spec_;
  oauth::ForwardAuthenticator* auth_;
  std::unique_ptr<oauth::ForwardAuthenticator> remote_;
};

/// Sends metadata discovery on resource hosts to the issuer: 308, or 307
/// when not permanent.
class RedirectWellknownMiddleware final : public Middleware {
 public:
  RedirectWellknownMiddleware(std::string id, std::string oauth_host, bool permanent,
                              std::function<std::string(std::string_view)> origin_for);
  std::string_view type() const override { return "redirect_wellknown"; }
  Decision handle(ExchangeContext& ctx) override;

 private:
  std::string oauth_host_;
  bool permanent_;
  std::function<std::string(std::string_view)> origin_for_;
};

/// 429 with Retry-After once the caller's bucket is empty. Callers without
/// the configured identity share a per-IP bucket.
class RateLimitMiddleware final : public Middleware {
 public:
  RateLimitMiddleware(std::string id, policy::RateLimitSpec spec, policy::RateLimiter& limiter,
                      const Clock& clock);
  std::string_view type() const override { return "rate_limit"; }
  Decision handle(ExchangeContext& ctx) override;
  /// Bucket key for a request; also used by tests.
  std::string key_for(const ExchangeContext& ctx) const;

 private:
  policy::RateLimitSpec spec_;
  policy::RateLimiter& limiter_;
  const Clock& clock_;
};

/// 403 while the peer IP or authenticated client_id has an active ban.
class BanCheckMiddleware final : public Middleware {
 public:
  BanCheckMiddleware(std::string id, policy::BanStore& bans, const Clock& clock);
  std::string_view type() const override { return "ban_check"; }
  Decision handle(ExchangeContext& ctx) override;

 private:
  policy::BanStore& bans_;
  const Clock& clock_;
};

/// The JSON body of a ban refusal.
HttpResponse banned_response(const policy::BanEntry& ban, WallTime now);

/// Protocol validation plus operator rules on requests; optionally the same
/// on server output, including tool description scanning of tools/list
/// results. Banned callers are refused before anything is evaluated.
class InspectMiddleware final : public Middleware {
 public:
  InspectMiddleware(std::string id, config::InspectSpec spec, inspect::RuleSet rules,
                    policy::BanStore* bans, inspect::DetectionLog* log, const Clock& clock);
  std::string_view type() const override { return "inspect"; }
  Decision handle(ExchangeContext& ctx) override;
  std::unique_ptr<ResponseFilter> response_filter(const ExchangeContext& ctx) override;

 private:
  config::InspectSpec spec_;
  std::shared_ptr<const inspect::RuleSet> rules_;
  policy::BanStore* bans_;
  inspect::DetectionLog* log_;
  const Clock& clock_;
};

/// JSON-RPC error code put in place of a blocked server message.
inline constexpr int kBlockedByInspection = -32003;

/// Filter used by InspectMiddleware for server-to-client traffic.
std::unique_ptr<ResponseFilter> make_inspect_filter(
    std::shared_ptr<const inspect::RuleSet> rules, std::string peer_ip,
    std::optional<std::string> client_id, policy::BanStore* bans, inspect::DetectionLog* log,
    const Clock& clock);

/// Throws std::invalid_argument when a needed service is missing.
std::unique_ptr<Middleware> make_middleware(const config::MiddlewareSpec& spec,
                                            const inspect::RuleSet& rules,
                                            const MiddlewareServices& services);

/// Instances for every middleware of one snapshot. Immutable after
/// construction; in-flight exchanges keep theirs alive by shared_ptr.
class Pipeline {
 public:
  Pipeline(const config::ConfigSnapshot& snapshot, const MiddlewareServices& services);

  /// Unknown ids throw std::out_of_range; validated snapshots have none.
  std::vector<Middleware*> chain(std::span<const std::string> ids) const;

 private:
  std::map<std::string, std::unique_ptr<Middleware>, std::less<>> by_id_;
};

}  // namespace mcpgw::gateway
