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
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mcpgw/common/http.h"

namespace mcpgw::gateway {

struct UpstreamRequest {
  std::string method;
  /// Encoded path plus "?query" when present.
  std::string target;
  Headers headers;
  std::string body;
};

/// Percent-encodes what may not appear raw in a path; '/' and existing
/// sub-delimiters are kept.
std::string encode_path(std::string_view decoded_path);

/// Drops hop-by-hop headers and any header named in Connection.
Headers without_hop_by_hop(const Headers& in);

/// Client request to backend request. Besides hop-by-hop headers this
/// removes Host, Content-Length, Authorization, Proxy-Authorization and any
/// client-supplied X-Forwarded-User, then adds X-Forwarded-For/-Host/-Proto
/// and the chain's mutations.
UpstreamRequest build_upstream_request(
    const HttpExchange& req, std::string_view base_path,
    const std::vector<std::pair<std::string, std::string>>& mutations);

/// Backend response headers fit for the client: hop-by-hop headers,
/// Content-Length and Content-Type removed (the writer sets those).
Headers client_response_headers(const httplib::Headers& upstream);

/// One backend request running on its own thread. Status and headers
/// become available first; the body then arrives as chunks. At most
/// `max_buffered` bytes wait in memory, after which the upstream read
/// pauses.
class UpstreamCall {
 public:
  enum class Pull { data, timeout, end };

  static std::shared_ptr<UpstreamCall> start(std::unique_ptr<httplib::Client> client,
                                             UpstreamRequest req,
                                             std::size_t max_buffered = 1u << 20);
  ~UpstreamCall();

  /// False when the backend could not be reached or sent no response.
  bool wait_headers();
  int status() const { return status_; }
  const httplib::Headers& headers() const { return headers_; }
  httplib::Error error() const { return error_; }

  /// Appends available body bytes to `out`. `end` once everything has been
  /// delivered, including after a mid-stream disconnect.
  Pull pull(std::string& out, std::chrono::milliseconds wait);

  /// Aborts the upstream exchange and joins the worker. Idempotent.
  void cancel();

 private:
  UpstreamCall() = default;
  void run(UpstreamRequest req);

  std::unique_ptr<httplib::Client> client_;
  std::thread worker_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool headers_ready_ = false;
  bool done_ = false;
  bool cancelled_ = false;
  int status_ = 0;
  httplib::Headers headers_;
  httplib::Error error_ = httplib::Error::Success;
  std::string buffer_;
  std::size_t max_buffered_ = 0;
  std::once_flag cancel_once_;
};

}  // namespace mcpgw::gateway
