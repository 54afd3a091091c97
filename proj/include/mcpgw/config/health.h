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
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/config/connector.h"
#include "mcpgw/config/registry.h"

namespace mcpgw::config {

inline constexpr std::chrono::seconds kHealthInterval{15};
inline constexpr std::chrono::milliseconds kProbeTimeout{2000};

/// True when the backend answered with a status below 500 in time.
using Prober = std::function<bool(const BackendServer&)>;

/// GET upstream_url through the connector.
Prober http_prober(const UpstreamConnector& connector,
                   std::chrono::milliseconds timeout = kProbeTimeout);

/// Probes every backend in the live snapshot. Only transitions are audited
/// (kind health_change); repeated identical results just refresh
/// last_probe.
class HealthMonitor {
 public:
  HealthMonitor(Registry& registry, Prober prober, const Clock& clock, audit::AuditSink* audit,
                std::chrono::milliseconds interval = kHealthInterval);
  ~HealthMonitor();

  HealthMonitor(const HealthMonitor&) = delete;
  HealthMonitor& operator=(const HealthMonitor&) = delete;

  /// One synchronous round; the test seam.
  void tick();
  /// Probes one backend now, e.g. right after onboarding.
  void probe(const BackendServer& backend);

  void start();
  void stop();

 private:
  Registry& registry_;
  Prober prober_;
  const Clock& clock_;
  audit::AuditSink* audit_;
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace mcpgw::config
