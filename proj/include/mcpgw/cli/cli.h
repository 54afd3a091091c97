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

#include <atomic>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mcpgw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Lets a caller other than a terminal drive `run`.
struct RunControl {
  /// Polled; `run` returns once it reads true. Null means SIGINT/SIGTERM.
  const std::atomic<bool>* stop = nullptr;
  /// Called once every listener is bound, with entry point name to port and
  /// "admin" for the admin listener.
  std::function<void(const std::map<std::string, int>&)> on_ready;
};

/// `args` excludes the program name. Never throws; every failure is an exit
/// code plus text on `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const RunControl& control = {});

}  // namespace mcpgw::cli
