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

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mcpgw::inspect {

struct RegexError {
  std::string message;
  std::size_t position = 0;
};

struct RegexMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Byte-oriented regular expressions, matched by a Thompson-NFA simulation so
/// search time is O(pattern * input) regardless of the pattern.
///
/// Supported: literals, `.`, `[...]` classes with ranges and negation,
/// `\d \D \w \W \s \S \b \B`, `\n \r \t \xHH`, `^ $`, `( )` and `(?: )`,
/// `|`, `* + ?` (lazy suffix accepted), `{m}`, `{m,}`, `{m,n}` with n <= 1000.
/// Backreferences and lookaround are rejected at compile time.
class Regex {
 public:
  static std::variant<Regex, RegexError> compile(std::string_view pattern,
                                                 bool case_insensitive = false);

  /// Leftmost match with the earliest end among threads started there.
  std::optional<RegexMatch> search(std::string_view input) const;
  bool contains_match(std::string_view input) const { return search(input).has_value(); }

  const std::string& pattern() const { return pattern_; }
  std::size_t program_size() const { return program_.size(); }

  struct Inst {
    enum class Op : std::uint8_t { byte, any, cls, split, jmp, match, bol, eol, word_b, not_word_b };
    Op op = Op::match;
    std::uint8_t byte = 0;
    int x = 0;
    int y = 0;
  };

 private:
  Regex() = default;

  std::string pattern_;
  bool icase_ = false;
  std::vector<Inst> program_;
  std::vector<std::bitset<256>> classes_;

  friend class RegexCompiler;
};

}  // namespace mcpgw::inspect
