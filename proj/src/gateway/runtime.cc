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

#include "mcpgw/gateway/runtime.h"

#include "mcpgw/oauth/identity_provider.h"

namespace mcpgw::gateway {

std::variant<std::unique_ptr<Runtime>, config::Diagnostics> Runtime::create(
    config::GatewayConfig cfg, RuntimeOptions options) {
  auto built = config::ConfigSnapshot::build(cfg);
  if (auto* d = std::get_if<config::Diagnostics>(&built)) return *d;
  auto base = std::get<config::SnapshotPtr>(built);

  std::unique_ptr<Runtime> rt(new Runtime(std::move(options)));
  if (!rt->options_.connector) rt->options_.connector = &rt->direct_;
  const Clock& clock = *rt->options_.clock;
  std::filesystem::path state = cfg.state_dir;

  audit::AuditLogOptions ao;
  ao.path = !cfg.audit.path.empty() ? std::filesystem::path(cfg.audit.path)
            : state.empty()         ? std::filesystem::path()
                                    : state / "audit.log";
  ao.max_segment_bytes = cfg.audit.max_segment_bytes;
  rt->audit_ = std::make_unique<audit::AuditLog>(ao, clock);

  rt->bans_ = std::make_unique<policy::BanStore>(state.empty() ? "" : state / "bans.json", clock,
                                                 rt->audit_.get());

  auto reg = config::Registry::open(base, clock, rt->audit_.get());
  if (auto* d = std::get_if<config::Diagnostics>(&reg)) return *d;
  rt->registry_ = std::move(std::get<std::unique_ptr<config::Registry>>(reg));

  oauth::OAuthSettings os;
  os.issuer_host = cfg.oauth.issuer_host;
  os.public_scheme = cfg.oauth.public_scheme;
  os.public_port = cfg.oauth.public_port;
  os.stub_idp_users = cfg.oauth.stub_idp_users;
  if (!state.empty()) os.state_dir = state / "oauth";
  auto* registry = rt->registry_.get();
  rt->auth_server_ = std::make_unique<oauth::AuthorizationServer>(
      os, nullptr, clock, rt->audit_.get(),
      [registry](std::string_view host) { return registry->current()->is_route_host(host); });
  rt->forward_auth_ = std::make_unique<oauth::LocalForwardAuth>(*rt->auth_server_, clock);
  rt->detections_ = std::make_unique<inspect::DetectionLog>(rt->audit_.get());
  rt->sse_limiter_ = std::make_unique<policy::ConnectionLimiter>(cfg.limits.max_sse_per_peer);

  GatewayDeps deps;
  deps.clock = &clock;
  deps.audit = rt->audit_.get();
  deps.registry = registry;
  deps.auth_server = rt->auth_server_.get();
  deps.connector = rt->options_.connector;
  deps.sse_limiter = rt->sse_limiter_.get();
  deps.services.clock = &clock;
  deps.services.local_auth = rt->forward_auth_.get();
  auto* as = rt->auth_server_.get();
  deps.services.origin_for = [as](std::string_view host) { return as->origin_for(host); };
  deps.services.issuer_host = cfg.oauth.issuer_host;
  deps.services.rate_limiter = &rt->rate_limiter_;
  deps.services.bans = rt->bans_.get();
  deps.services.detections = rt->detections_.get();
  rt->gateway_ = std::make_unique<Gateway>(std::move(deps));

  auto prober = rt->options_.prober ? *rt->options_.prober
                                    : config::http_prober(*rt->options_.connector);
  rt->health_ = std::make_unique<config::HealthMonitor>(*registry, std::move(prober), clock,
                                                        rt->audit_.get());
  return rt;
}

Runtime::~Runtime() { stop(); }

std::optional<std::string> Runtime::start() {
  auto snap = registry_->current();
  for (const auto& ep : snap->config().entry_points) {
    auto addr = config::parse_listen_address(ep.address);
    if (!addr) {
      stop();
      return "entry point " + ep.name + ": bad address " + ep.address;
    }
    std::optional<ListenerTls> tls;
    if (ep.tls) tls = ListenerTls{ep.tls->cert_file, ep.tls->key_file};
    ListenerContext where{ep.name, ep.tls.has_value()};
    auto* gw = gateway_.get();
    auto bound = Listener::bind(addr->host, addr->port, tls,
                                [gw, where](const httplib::Request& req, httplib::Response& res) {
                                  gw->serve(req, res, where);
                                });
    if (auto* err = std::get_if<std::string>(&bound)) {
      stop();
      return "entry point " + ep.name + ": " + *err;
    }
    listeners_[ep.name] = std::move(std::get<std::unique_ptr<Listener>>(bound));
  }
  for (auto& [name, l] : listeners_) l->start();
  if (options_.start_health_monitor) health_->start();
  return std::nullopt;
}

void Runtime::stop() {
  if (health_) health_->stop();
  for (auto& [name, l] : listeners_) l->stop();
  listeners_.clear();
}

int Runtime::port(std::string_view entry_point) const {
  auto it = listeners_.find(entry_point);
  return it == listeners_.end() ? 0 : it->second->port();
}

}  // namespace mcpgw::gateway
