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

#include "mcpgw/oauth/types.h"

#include <cctype>
#include <sstream>

namespace mcpgw::oauth {

namespace {

bool is_tool_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         c == '/';
}

template <typename F>
void for_each_scope(std::string_view scope, F&& f) {
  std::size_t i = 0;
  while (i < scope.size()) {
    std::size_t j = scope.find(' ', i);
    if (j == std::string_view::npos) j = scope.size();
    f(scope.substr(i, j - i));
    i = j + 1;
  }
}

}  // namespace

bool is_valid_scope(std::string_view scope) {
  if (scope.empty() || scope.front() == ' ' || scope.back() == ' ') return false;
  bool ok = true;
  for_each_scope(scope, [&](std::string_view tok) {
    if (tok == kBaseScope) return;
    if (tok.starts_with(kToolScopePrefix) && tok.size() > kToolScopePrefix.size()) {
      for (char c : tok.substr(kToolScopePrefix.size())) ok = ok && is_tool_name_char(c);
      return;
    }
    ok = false;
  });
  return ok;
}

bool scope_allows_tool(std::string_view scope, std::string_view name) {
  bool per_tool = false;
  bool named = false;
  bool base = false;
  for_each_scope(scope, [&](std::string_view tok) {
    if (tok == kBaseScope) base = true;
    if (tok.starts_with(kToolScopePrefix)) {
      per_tool = true;
      if (tok.substr(kToolScopePrefix.size()) == name) named = true;
    }
  });
  return per_tool ? named : base;
}

}  // namespace mcpgw::oauth
