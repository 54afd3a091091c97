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

#include "mcpgw/testkit/sse_reader.h"

#include <sstream>

namespace mcpgw::testkit {

namespace {

SseFrame parse(std::string raw) {
  SseFrame f;
  std::istringstream in(raw);
  std::string line;
  bool first_data = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == ':') continue;
    auto colon = line.find(':');
    std::string field = line.substr(0, colon);
    std::string value = colon == std::string::npos ? "" : line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (field == "event") {
      f.event = value;
    } else if (field == "data") {
      if (!first_data) f.data.push_back('\n');
      f.data += value;
      first_data = false;
    }
  }
  f.raw = std::move(raw);
  return f;
}

}  // namespace

std::unique_ptr<SseReader> SseReader::open(const std::string& host, int port, std::string target,
                                           httplib::Headers headers,
                                           std::chrono::milliseconds timeout) {
  std::unique_ptr<SseReader> r(new SseReader());
  r->client_ = std::make_unique<httplib::Client>(host, port);
  r->client_->set_connection_timeout(timeout);
  r->client_->set_read_timeout(std::chrono::seconds(60));
  if (!headers.count("Accept")) headers.emplace("Accept", "text/event-stream");
  auto* self = r.get();
  r->worker_ = std::thread([self, target = std::move(target), headers = std::move(headers)] {
    self->client_->Get(
        target, headers,
        [self](const httplib::Response& res) {
          std::lock_guard lock(self->mu_);
          self->status_ = res.status;
          self->headers_ = res.headers;
          self->headers_ready_ = true;
          self->cv_.notify_all();
          return !self->closing_;
        },
        [self](const char* data, std::size_t n) {
          std::lock_guard lock(self->mu_);
          if (self->closing_) return false;
          self->raw_.append(data, n);
          self->pending_.append(data, n);
          std::size_t end;
          while ((end = self->pending_.find("\n\n")) != std::string::npos) {
            self->frames_.push_back(parse(self->pending_.substr(0, end + 2)));
            self->pending_.erase(0, end + 2);
          }
          self->cv_.notify_all();
          return true;
        });
    std::lock_guard lock(self->mu_);
    self->ended_ = true;
    self->cv_.notify_all();
  });
  std::unique_lock lock(r->mu_);
  r->cv_.wait_for(lock, timeout + std::chrono::seconds(1),
                  [&] { return r->headers_ready_ || r->ended_; });
  return r;
}

SseReader::~SseReader() { close(); }

std::string SseReader::header(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = headers_.find(name);
  return it == headers_.end() ? "" : it->second;
}

std::optional<SseFrame> SseReader::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || ended_; });
  if (frames_.empty()) return std::nullopt;
  auto f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

std::string SseReader::raw() const {
  std::lock_guard lock(mu_);
  return raw_;
}

bool SseReader::ended() const {
  std::lock_guard lock(mu_);
  return ended_ && frames_.empty();
}

void SseReader::close() {
  {
    std::lock_guard lock(mu_);
    if (closing_ && !worker_.joinable()) return;
    closing_ = true;
  }
  while (worker_.joinable()) {
    client_->stop();
    std::unique_lock lock(mu_);
    if (cv_.wait_for(lock, std::chrono::milliseconds(50), [&] { return ended_; })) {
      lock.unlock();
      worker_.join();
    }
  }
}

}  // namespace mcpgw::testkit
