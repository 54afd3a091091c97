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
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/clock.h"
#include "mcpgw/common/http.h"
#include "mcpgw/inspect/mcp_message.h"
#include "mcpgw/inspect/regex.h"
#include "mcpgw/inspect/tool_scanner.h"
#include "mcpgw/policy/ban_store.h"

namespace mcpgw::inspect {

enum class RuleTarget { message, tool_description, traffic };
enum class Severity { low, medium, high };
/// Ordered: none < log < deny < ban.
enum class ActionKind { none, log, deny, ban };
enum class PatternKind { literal, iliteral, regex, iregex, detector };
enum class BanTarget { peer_ip, client_id };

const char* to_string(RuleTarget t);
const char* to_string(Severity s);
const char* to_string(ActionKind a);
const char* to_string(PatternKind p);
std::optional<RuleTarget> parse_rule_target(std::string_view s);
std::optional<Severity> parse_severity(std::string_view s);
std::optional<ActionKind> parse_action(std::string_view s);
std::optional<PatternKind> parse_pattern_kind(std::string_view s);

inline ActionKind join(ActionKind a, ActionKind b) { return a < b ? b : a; }

inline constexpr std::string_view kBuiltinPrefix = "builtin.";

struct ThreatRuleSpec {
  std::string id;
  RuleTarget target = RuleTarget::message;
  PatternKind pattern_kind = PatternKind::literal;
  std::string pattern;
  Severity severity = Severity::medium;
  ActionKind action = ActionKind::log;
  std::chrono::seconds ban_ttl{0};
  BanTarget ban_target = BanTarget::peer_ip;

  bool operator==(const ThreatRuleSpec&) const = default;
};

/// The always-present detector rules with their default actions.
std::vector<ThreatRuleSpec> builtin_rules();

struct RuleDiagnostic {
  std::string path;
  std::string message;
};

struct DetectionEvent {
  std::string rule_id;
  Severity severity = Severity::low;
  ActionKind action_taken = ActionKind::log;
  std::string peer_ip;
  std::optional<std::string> client_id;
  std::string excerpt;
  WallTime observed_at{};
};

/// Everything a rule can look at for one request or response message.
struct InspectionContext {
  std::string peer_ip;
  std::optional<std::string> client_id;
  std::string_view message_body;
  std::string traffic_line;
  std::span<const Violation> violations;
  std::span<const Finding> findings;
  std::span<const ToolDescriptor> tools;
};

struct EvaluationResult {
  std::vector<DetectionEvent> events;
  ActionKind aggregate = ActionKind::none;
  /// 400 when a protocol rule drove a deny, else 403. Meaningful only when
  /// aggregate >= deny.
  int deny_status = 403;
  std::chrono::seconds ban_ttl{0};
  BanTarget ban_target = BanTarget::peer_ip;
  std::string ban_reason;
};

/// Compiled, immutable rule set: built-in detector rules (with operator
/// overrides applied) plus operator pattern rules.
class RuleSet {
 public:
  /// Fails closed: any bad pattern, duplicate id, or unknown built-in rejects
  /// the whole set.
  static std::variant<RuleSet, std::vector<RuleDiagnostic>> compile(
      const std::vector<ThreatRuleSpec>& specs, std::string_view path_prefix = "rules");

  EvaluationResult evaluate(const InspectionContext& ctx, WallTime now) const;

  /// Subset restricted to `ids` (built-ins always kept). Unknown ids are
  /// reported by the caller at config time.
  RuleSet restricted_to(std::span<const std::string> ids) const;

  const std::vector<ThreatRuleSpec>& specs() const { return specs_; }
  bool has_rule(std::string_view id) const;

 private:
  struct Compiled {
    ThreatRuleSpec spec;
    std::shared_ptr<const Regex> regex;
  };

  std::optional<std::pair<std::size_t, std::size_t>> match(const Compiled& rule,
                                                           std::string_view text) const;

  std::vector<ThreatRuleSpec> specs_;
  std::vector<Compiled> rules_;
};

/// Recent detections for the admin API; each one is also audited.
class DetectionLog {
 public:
  explicit DetectionLog(audit::AuditSink* audit, std::size_t capacity = 1000)
      : audit_(audit), capacity_(capacity) {}

  void record(const DetectionEvent& e);
  std::vector<DetectionEvent> recent(std::size_t limit = 100) const;
  std::size_t total() const;

 private:
  audit::AuditSink* audit_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<DetectionEvent> events_;
  std::size_t total_ = 0;
};

struct Enforcement {
  EvaluationResult result;
  std::optional<ShortCircuit> response;
  std::optional<policy::BanEntry> ban;
};

/// Evaluates and applies side effects: records events and, for a ban,
/// stores the BanEntry before the response is produced.
Enforcement enforce(const RuleSet& rules, const InspectionContext& ctx, policy::BanStore* bans,
                    DetectionLog* log, const Clock& clock);

std::string error_json(std::string_view error, std::string_view description);

}  // namespace mcpgw::inspect
