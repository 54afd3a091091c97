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

#include "mcpgw/gateway/gateway.h"

#include "mcpgw/common/listener.h"
#include "mcpgw/gateway/proxy.h"
#include "mcpgw/gateway/router.h"
#include "mcpgw/gateway/sse.h"

namespace mcpgw::gateway {

namespace {

constexpr std::size_t kMaxBufferedBody = 16u << 20;
constexpr auto kPullWait = std::chrono::milliseconds(200);

HttpResponse json_error(int status, std::string_view error, std::string_view description) {
  return short_circuit(status, inspect::error_json(error, description), "application/json")
      .response;
}

bool wants_event_stream(const HttpExchange& ex) {
  if (ex.method != "GET") return false;
  for (const auto& v : ex.headers.get_all("Accept")) {
    if (to_lower(v).find("text/event-stream") != std::string::npos) return true;
  }
  return false;
}

bool is_event_stream(std::string_view content_type) {
  return to_lower(content_type).starts_with("text/event-stream");
}

std::string outcome_for(int status) {
  if (status == 401) return "unauthenticated";
  if (status == 403) return "forbidden";
  if (status == 429) return "rate_limited";
  if (status >= 500) return "error";
  if (status >= 400) return "rejected";
  if (status >= 300) return "redirected";
  return "ok";
}

}  // namespace

Gateway::Gateway(GatewayDeps deps) : deps_(std::move(deps)) {}

std::shared_ptr<const Pipeline> Gateway::pipeline_for(const config::SnapshotPtr& snapshot) {
  std::lock_guard lock(pipeline_mu_);
  if (pipeline_snapshot_ != snapshot || !pipeline_) {
    pipeline_ = std::make_shared<const Pipeline>(*snapshot, deps_.services);
    pipeline_snapshot_ = snapshot;
  }
  return pipeline_;
}

void Gateway::audit_exchange(const audit::Summary& summary) {
  if (deps_.audit) deps_.audit->append(audit::Kind::exchange, summary);
}

void Gateway::finish(httplib::Response& res, const HttpResponse& out, audit::Summary summary) {
  summary["status"] = std::to_string(out.status);
  if (!summary.count("outcome")) summary["outcome"] = outcome_for(out.status);
  audit_exchange(summary);
  write_response(out, res);
}

void Gateway::serve(const httplib::Request& raw, httplib::Response& res,
                    const ListenerContext& where) {
  const Clock& clock = *deps_.clock;
  audit::Summary summary{{"entry_point", where.entry_point},
                         {"method", raw.method},
                         {"peer", raw.remote_addr}};
  auto parsed = to_exchange(raw, where.tls, clock.mono_now());
  if (!parsed) {
    summary["outcome"] = "bad_request";
    finish(res, json_error(400, "invalid_request", "bad Host header or path"), summary);
    return;
  }
  const HttpExchange& ex = *parsed;
  summary["host"] = ex.host;
  summary["path"] = ex.path;

  auto snap = deps_.registry->current();
  const auto& cfg = snap->config();
  if (ex.body.size() > cfg.limits.max_body_bytes) {
    finish(res, json_error(413, "payload_too_large", "request body exceeds the limit"), summary);
    return;
  }
  if (ex.path == kAdminPrefix || ex.path.starts_with(std::string(kAdminPrefix) + "/")) {
    summary["outcome"] = "not_found";
    finish(res, json_error(404, "not_found", "no route"), summary);
    return;
  }

  std::shared_ptr<const Pipeline> pipeline;
  try {
    pipeline = pipeline_for(snap);
  } catch (const std::exception& e) {
    summary["outcome"] = "error";
    summary["error"] = e.what();
    finish(res, json_error(500, "server_error", "middleware setup failed"), summary);
    return;
  }

  // The authorization server's own host, optionally behind a chain.
  if (!cfg.oauth.issuer_host.empty() && ex.host == cfg.oauth.issuer_host) {
    summary["route"] = "oauth";
    if (!deps_.auth_server) {
      summary["outcome"] = "not_found";
      finish(res, json_error(404, "not_found", "no route"), summary);
      return;
    }
    RouteConfig route;
    route.id = "oauth";
    route.host_rule = cfg.oauth.issuer_host;
    ExchangeContext ctx{ex, route, std::nullopt};
    auto chain = pipeline->chain(cfg.oauth.middleware_ids);
    auto result = run_chain(chain, ctx);
    if (auto* sc = std::get_if<ShortCircuit>(&result.decision)) {
      if (const auto* by = result.decided_by()) summary["decided_by"] = *by;
      if (result.error) summary["outcome"] = "error";
      finish(res, sc->response, summary);
      return;
    }
    finish(res, deps_.auth_server->handle(ex), summary);
    return;
  }

  const RouteConfig* route = route_request(ex, cfg.routers, where.entry_point);
  if (!route) {
    summary["outcome"] = "not_found";
    finish(res, json_error(404, "not_found", "no route"), summary);
    return;
  }
  summary["route"] = route->id;
  summary["backend"] = route->backend_id;
  if (route->tls_required && !where.tls) {
    finish(res, json_error(403, "tls_required", "this route is served over TLS only"), summary);
    return;
  }

  ExchangeContext ctx{ex, *route, std::nullopt};
  auto chain = pipeline->chain(route->middleware_ids);
  auto result = run_chain(chain, ctx);
  if (auto* sc = std::get_if<ShortCircuit>(&result.decision)) {
    if (const auto* by = result.decided_by()) summary["decided_by"] = *by;
    if (result.error) {
      summary["outcome"] = "error";
      summary["error"] = *result.error;
    }
    if (ctx.claims) summary["subject"] = ctx.claims->subject;
    finish(res, sc->response, summary);
    return;
  }
  if (ctx.claims) summary["subject"] = ctx.claims->subject;
  proxy(ex, snap, *route, pipeline, ctx, chain, std::get<Continue>(std::move(result.decision)),
        res, std::move(summary));
}

void Gateway::proxy(const HttpExchange& ex, const config::SnapshotPtr& snap,
                    const RouteConfig& route, std::shared_ptr<const Pipeline> pipeline,
                    ExchangeContext& ctx, const std::vector<Middleware*>& chain,
                    Continue mutations, httplib::Response& res, audit::Summary summary) {
  const auto& limits = snap->config().limits;
  const BackendServer* backend = snap->find_backend(route.backend_id);
  if (!backend || !deps_.connector) {
    summary["outcome"] = "upstream_unreachable";
    finish(res, json_error(502, "bad_gateway", "backend unavailable"), summary);
    return;
  }

  // Admission is decided before the backend is contacted.
  std::shared_ptr<policy::ConnectionLimiter::Slot> slot;
  if (deps_.sse_limiter && wants_event_stream(ex)) {
    auto s = deps_.sse_limiter->try_acquire(ex.peer.ip);
    if (!s) {
      summary["outcome"] = "stream_limit";
      auto out = json_error(429, "too_many_streams", "concurrent stream limit reached");
      out.headers.set("Retry-After", "1");
      finish(res, out, summary);
      return;
    }
    slot = std::make_shared<policy::ConnectionLimiter::Slot>(std::move(*s));
  }

  config::UpstreamTimeouts timeouts{std::chrono::milliseconds(limits.upstream_connect_timeout_ms),
                                    std::chrono::milliseconds(limits.upstream_read_timeout_ms)};
  auto client = deps_.connector->open(*backend, timeouts);
  if (!client) {
    summary["outcome"] = "upstream_unreachable";
    finish(res, json_error(502, "bad_gateway", "backend address is unusable"), summary);
    return;
  }
  auto up = build_upstream_request(ex, deps_.connector->base_path(*backend),
                                   mutations.header_mutations);
  auto call = UpstreamCall::start(std::move(client), std::move(up));
  if (!call->wait_headers()) {
    summary["outcome"] = "upstream_unreachable";
    summary["error"] = httplib::to_string(call->error());
    call->cancel();
    finish(res, json_error(502, "bad_gateway", "backend unreachable"), summary);
    return;
  }

  // Filters stay with the exchange: a swap mid-stream changes nothing here.
  std::vector<std::shared_ptr<ResponseFilter>> filters;
  for (Middleware* m : chain) {
    if (auto f = m->response_filter(ctx)) filters.push_back(std::move(f));
  }

  HttpResponse head;
  head.status = call->status();
  head.headers = client_response_headers(call->headers());
  auto ct_it = call->headers().find("Content-Type");
  std::string content_type = ct_it == call->headers().end() ? "" : ct_it->second;
  summary["status"] = std::to_string(head.status);
  summary["outcome"] = "ok";

  if (!is_event_stream(content_type)) {
    std::string body;
    while (true) {
      auto p = call->pull(body, kPullWait);
      if (p == UpstreamCall::Pull::end) break;
      if (body.size() > kMaxBufferedBody) {
        call->cancel();
        summary["outcome"] = "upstream_error";
        finish(res, json_error(502, "bad_gateway", "backend response too large"), summary);
        return;
      }
    }
    call->cancel();
    for (auto& f : filters) body = f->on_body(std::move(body), content_type);
    head.body = std::move(body);
    if (!content_type.empty()) head.headers.set("Content-Type", content_type);
    audit_exchange(summary);
    write_response(head, res);
    return;
  }

  audit_exchange(summary);
  res.status = head.status;
  for (const auto& [name, value] : head.headers) res.headers.emplace(name, value);
  res.set_header("Cache-Control", "no-cache");
  auto framer = std::make_shared<SseFramer>();
  auto keep = std::make_shared<std::pair<config::SnapshotPtr, std::shared_ptr<const Pipeline>>>(
      snap, std::move(pipeline));
  res.set_chunked_content_provider(
      content_type,
      [call, framer, filters](std::size_t, httplib::DataSink& sink) {
        std::string data;
        auto p = call->pull(data, kPullWait);
        if (p == UpstreamCall::Pull::timeout) return sink.is_writable();
        if (!data.empty()) {
          if (filters.empty()) {
            if (!sink.write(data.data(), data.size())) return false;
          } else {
            for (auto& frame : framer->feed(data)) {
              for (auto& f : filters) {
                if (frame.empty()) break;
                frame = f->on_sse_frame(std::move(frame));
              }
              if (!frame.empty() && !sink.write(frame.data(), frame.size())) return false;
            }
          }
        }
        if (p == UpstreamCall::Pull::end) {
          // A trailing partial frame is passed through as-is.
          auto rest = framer->flush();
          if (!rest.empty() && !sink.write(rest.data(), rest.size())) return false;
          sink.done();
        }
        return true;
      },
      [call, slot, keep](bool) { call->cancel(); });
}

}  // namespace mcpgw::gateway
