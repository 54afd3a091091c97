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

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace mcpgw::testkit {

struct ClientOptions {
  /// Every URL, whatever its scheme and port, is sent here with the URL's
  /// host in the Host header. This stands in for DNS and TLS termination.
  std::string connect_host = "127.0.0.1";
  int connect_port = 0;
  /// The protected MCP endpoint (SSE transport).
  std::string resource_url = "https://helloworld.example.test/sse";
  std::string redirect_uri = "http://127.0.0.1:53682/callback";
  std::string user = "alice";
  /// Replaces the real code_verifier at the token exchange.
  std::optional<std::string> verifier_override;
  /// Tool called once the session is up.
  std::string tool = "helloworld";
  std::chrono::milliseconds step_timeout{5000};
};

struct TranscriptStep {
  int number = 0;
  std::string name;
  bool passed = false;
  int status = 0;
  /// What was expected and, on failure, what happened instead.
  std::string detail;
};

struct Transcript {
  std::vector<TranscriptStep> steps;
  /// Every authorization code the client saw, in order.
  std::vector<std::string> codes;
  std::string client_id;
  std::string access_token;
  std::vector<std::string> tool_names;
  std::string tool_result;
  /// OAuth error code from the token endpoint, when it refused.
  std::string token_error;
  std::chrono::milliseconds elapsed{0};

  /// All seven steps ran and passed.
  bool passed() const;
  /// 1-based number of the first failed step.
  std::optional<int> failed_step() const;
  std::string describe() const;
};

/// Discovery, registration, authorization code with PKCE, stub login,
/// token exchange and the authenticated retry, stopping at the first step
/// whose outcome differs from the expected one.
Transcript run_client_flow(const ClientOptions& options);

}  // namespace mcpgw::testkit
