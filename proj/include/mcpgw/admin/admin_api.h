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

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcpgw/common/listener.h"
#include "mcpgw/config/config.h"
#include "mcpgw/gateway/runtime.h"

namespace mcpgw::admin {

inline constexpr const char* kKeyHeader = "X-Admin-Key";
inline constexpr std::size_t kDefaultTail = 100;
inline constexpr std::size_t kMaxTail = 10000;
inline constexpr std::size_t kMaxDetections = 1000;

/// The key entry whose salted hash matches `presented`, if any. Every
/// configured key is checked so timing does not reveal which one matched.
const config::AdminKey* authenticate(const std::vector<config::AdminKey>& keys,
                                     std::string_view presented);

nlohmann::json to_json(const policy::BanEntry& b);
nlohmann::json to_json(const inspect::DetectionEvent& e);
nlohmann::json to_json(const BackendHealth& h);

/// One SSE frame per record; the id is the record's seq and the data is the
/// record's canonical log line.
std::string audit_frame(const audit::AuditRecord& r);

/// Stateless handlers over the runtime's stores. Writes go through the
/// registry or the ban store, which audit before returning, so the record
/// is in the chain before the response leaves.
class AdminApi {
 public:
  AdminApi(gateway::Runtime& runtime, config::AdminSettings settings);
  ~AdminApi();
  AdminApi(const AdminApi&) = delete;
  AdminApi& operator=(const AdminApi&) = delete;

  void handle(const httplib::Request& req, httplib::Response& res);

  /// Ends open audit tails and joins background probes. Idempotent.
  void shutdown();

 private:
  struct Call;

  void list_servers(Call& c);
  void onboard_server(Call& c);
  void list_routes(Call& c);
  void set_route_middlewares(Call& c, const std::string& route_id);
  void list_detections(Call& c);
  void list_bans(Call& c);
  void create_ban(Call& c);
  void delete_ban(Call& c, const std::string& ban_id);
  void audit_tail(Call& c);
  void health(Call& c);
  bool serve_ui(const httplib::Request& req, httplib::Response& res);
  void probe_later(const BackendServer& backend);

  gateway::Runtime& rt_;
  config::AdminSettings settings_;
  std::shared_ptr<std::atomic<bool>> stopping_ = std::make_shared<std::atomic<bool>>(false);
  std::mutex probes_mu_;
  std::vector<std::thread> probes_;
};

/// The dedicated admin listener. Shares nothing with the public listeners
/// except the runtime it inspects.
class AdminService {
 public:
  /// Binds settings.address. Port 0 picks an ephemeral port.
  static std::variant<std::unique_ptr<AdminService>, std::string> create(
      gateway::Runtime& runtime, const config::AdminSettings& settings);
  ~AdminService();

  void start();
  void stop();
  int port() const { return listener_->port(); }
  AdminApi& api() { return *api_; }

 private:
  AdminService() = default;

  std::unique_ptr<AdminApi> api_;
  std::unique_ptr<Listener> listener_;
};

}  // namespace mcpgw::admin
