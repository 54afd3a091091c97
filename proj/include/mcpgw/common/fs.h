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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace mcpgw {

/// Writes via a sibling temp file and rename, so readers see either the old
/// or the new content. `owner_only` restricts the file to mode 0600.
/// Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content,
                       bool owner_only = false);

/// Whole file, or nullopt when it does not exist or cannot be read.
std::optional<std::string> read_text_file(const std::filesystem::path& path);

}  // namespace mcpgw
