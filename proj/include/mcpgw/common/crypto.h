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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcpgw::crypto {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Lowercase hex only; nullopt on odd length or any other character.
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

std::string base64url_nopad(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> random_bytes(std::size_t n);

/// URL-safe random handle with `bytes` of entropy and an optional type prefix.
std::string random_token(std::size_t bytes, std::string_view prefix = {});

/// PKCE S256 transform: BASE64URL-NOPAD(SHA-256(ascii(verifier))).
std::string pkce_s256(std::string_view verifier);

/// True for 43..128 characters drawn from [A-Za-z0-9-._~].
bool is_valid_pkce_verifier(std::string_view verifier);

bool constant_time_equal(std::string_view a, std::string_view b);

/// Hex SHA-256 over salt || secret. Used for everything persisted that would
/// otherwise be a bearer secret.
std::string salted_hash(std::string_view salt, std::string_view secret);

/// "<salt-hex>$<hash-hex>" form for operator API keys.
std::string hash_api_key(std::string_view key);
bool verify_api_key(std::string_view key, std::string_view stored);

}  // namespace mcpgw::crypto
