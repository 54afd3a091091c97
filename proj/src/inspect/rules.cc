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

#include "mcpgw/inspect/rules.h"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace mcpgw::inspect {

const char* to_string(RuleTarget t) {
  switch (t) {
    case RuleTarget::message: return "message";
    case RuleTarget::tool_description: return "tool_description";
    case RuleTarget::traffic: return "traffic";
  }
  return "message";
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
  }
  return "low";
}

const char* to_string(ActionKind a) {
  switch (a) {
    case ActionKind::none: return "none";
    case ActionKind::log: return "log";
    case ActionKind::deny: return "deny";
    case ActionKind::ban: return "ban";
  }
  return "none";
}

const char* to_string(PatternKind p) {
  switch (p) {
    case PatternKind::literal: return "literal";
    case PatternKind::iliteral: return "iliteral";
    case PatternKind::regex: return "regex";
    case PatternKind::iregex: return "iregex";
    case PatternKind::detector: return "detector";
  }
  return "literal";
}

std::optional<RuleTarget> parse_rule_target(std::string_view s) {
  for (auto t : {RuleTarget::message, RuleTarget::tool_description, RuleTarget::traffic}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view s) {
  for (auto v : {Severity::low, Severity::medium, Severity::high}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<ActionKind> parse_action(std::string_view s) {
  for (auto v : {ActionKind::log, ActionKind::deny, ActionKind::ban}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<PatternKind> parse_pattern_kind(std::string_view s) {
  for (auto v : {PatternKind::literal, PatternKind::iliteral, PatternKind::regex,
                 PatternKind::iregex, PatternKind::detector}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::vector<ThreatRuleSpec> builtin_rules() {
  std::vector<ThreatRuleSpec> out;
  auto add = [&](std::string name, RuleTarget target, Severity sev, ActionKind act) {
    ThreatRuleSpec r;
    r.id = "builtin." + name;
    r.target = target;
    r.pattern_kind = PatternKind::detector;
    r.pattern = name;
    r.severity = sev;
    r.action = act;
    out.push_back(std::move(r));
  };
  add("protocol.not_json", RuleTarget::message, Severity::high, ActionKind::deny);
  add("protocol.bad_envelope", RuleTarget::message, Severity::high, ActionKind::deny);
  add("protocol.unknown_method", RuleTarget::message, Severity::medium, ActionKind::deny);
  add("protocol.oversize", RuleTarget::message, Severity::high, ActionKind::deny);
  add("poison.injection_phrase", RuleTarget::tool_description, Severity::high, ActionKind::deny);
  add("poison.invisible_chars", RuleTarget::tool_description, Severity::high, ActionKind::deny);
  add("poison.hidden_comment", RuleTarget::tool_description, Severity::medium, ActionKind::deny);
  add("poison.cross_tool_reference", RuleTarget::tool_description, Severity::medium,
      ActionKind::deny);
  add("poison.oversized_description", RuleTarget::tool_description, Severity::low,
      ActionKind::log);
  return out;
}

std::variant<RuleSet, std::vector<RuleDiagnostic>> RuleSet::compile(
    const std::vector<ThreatRuleSpec>& specs, std::string_view path_prefix) {
  std::vector<RuleDiagnostic> diags;
  auto builtins = builtin_rules();
  std::set<std::string> seen;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    std::string path = std::string(path_prefix) + "[" + std::to_string(i) + "]";
    if (s.id.empty()) {
      diags.push_back({path + ".id", "rule id is required"});
      continue;
    }
    if (!seen.insert(s.id).second) {
      diags.push_back({path + ".id", "duplicate rule id '" + s.id + "'"});
      continue;
    }
    if (s.action == ActionKind::ban && s.ban_ttl.count() <= 0) {
      diags.push_back({path + ".ban_ttl", "ban rules need a positive ttl"});
    }
    if (s.action == ActionKind::none) {
      diags.push_back({path + ".action", "action is required"});
    }
    if (s.id.starts_with(kBuiltinPrefix)) {
      auto it = std::find_if(builtins.begin(), builtins.end(),
                             [&](const ThreatRuleSpec& b) { return b.id == s.id; });
      if (it == builtins.end()) {
        diags.push_back({path + ".id", "unknown built-in rule '" + s.id + "'"});
      }
      continue;
    }
    switch (s.pattern_kind) {
      case PatternKind::detector:
        diags.push_back({path + ".pattern", "detector patterns are reserved for built-in rules"});
        break;
      case PatternKind::literal:
      case PatternKind::iliteral:
        if (s.pattern.empty()) diags.push_back({path + ".pattern", "pattern is empty"});
        break;
      case PatternKind::regex:
      case PatternKind::iregex: {
        if (s.pattern.empty()) {
          diags.push_back({path + ".pattern", "pattern is empty"});
          break;
        }
        auto r = Regex::compile(s.pattern, s.pattern_kind == PatternKind::iregex);
        if (auto* err = std::get_if<RegexError>(&r)) {
          diags.push_back({path + ".pattern", "invalid regular expression at offset " +
                                                  std::to_string(err->position) + ": " +
                                                  err->message});
        }
        break;
      }
    }
  }
  if (!diags.empty()) return diags;

  RuleSet set;
  // Built-ins first, overridden in place.
  for (auto b : builtins) {
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const ThreatRuleSpec& s) { return s.id == b.id; });
    if (it != specs.end()) {
      b.severity = it->severity;
      b.action = it->action;
      b.ban_ttl = it->ban_ttl;
      b.ban_target = it->ban_target;
    }
    set.specs_.push_back(b);
    set.rules_.push_back({b, nullptr});
  }
  for (const auto& s : specs) {
    if (s.id.starts_with(kBuiltinPrefix)) continue;
    Compiled c{s, nullptr};
    if (s.pattern_kind == PatternKind::regex || s.pattern_kind == PatternKind::iregex) {
      c.regex = std::make_shared<const Regex>(
          std::get<Regex>(Regex::compile(s.pattern, s.pattern_kind == PatternKind::iregex)));
    }
    set.specs_.push_back(s);
    set.rules_.push_back(std::move(c));
  }
  return set;
}

bool RuleSet::has_rule(std::string_view id) const {
  return std::any_of(specs_.begin(), specs_.end(), [&](const auto& s) { return s.id == id; });
}

RuleSet RuleSet::restricted_to(std::span<const std::string> ids) const {
  if (ids.empty()) return *this;
  RuleSet out;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& id = rules_[i].spec.id;
    bool keep = id.starts_with(kBuiltinPrefix) ||
                std::find(ids.begin(), ids.end(), id) != ids.end();
    if (keep) {
      out.specs_.push_back(specs_[i]);
      out.rules_.push_back(rules_[i]);
    }
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> RuleSet::match(const Compiled& rule,
                                                                  std::string_view text) const {
  switch (rule.spec.pattern_kind) {
    case PatternKind::literal: {
      auto pos = text.find(rule.spec.pattern);
      if (pos == std::string_view::npos) return std::nullopt;
      return std::pair{pos, pos + rule.spec.pattern.size()};
    }
    case PatternKind::iliteral: {
      const auto& needle = rule.spec.pattern;
      if (text.size() < needle.size()) return std::nullopt;
      for (std::size_t i = 0; i + needle.size() <= text.size(); ++i) {
        if (iequals(text.substr(i, needle.size()), needle)) return std::pair{i, i + needle.size()};
      }
      return std::nullopt;
    }
    case PatternKind::regex:
    case PatternKind::iregex: {
      auto m = rule.regex->search(text);
      if (!m) return std::nullopt;
      return std::pair{m->begin, m->end};
    }
    case PatternKind::detector:
      break;
  }
  return std::nullopt;
}

EvaluationResult RuleSet::evaluate(const InspectionContext& ctx, WallTime now) const {
  EvaluationResult out;
  bool protocol_deny = false;
  bool content_deny = false;

  for (const auto& rule : rules_) {
    const auto& spec = rule.spec;
    std::optional<std::string> excerpt;

    if (spec.pattern_kind == PatternKind::detector) {
      if (spec.pattern.starts_with("protocol.")) {
        auto code = std::string_view(spec.pattern).substr(9);
        for (const auto& v : ctx.violations) {
          if (v.code == code) {
            excerpt = make_excerpt(v.detail);
            break;
          }
        }
      } else if (spec.pattern.starts_with("poison.")) {
        auto det = std::string_view(spec.pattern).substr(7);
        for (const auto& f : ctx.findings) {
          if (f.detector == det) {
            excerpt = f.tool_name + ": " + f.excerpt;
            break;
          }
        }
      }
    } else {
      switch (spec.target) {
        case RuleTarget::message:
          if (auto m = match(rule, ctx.message_body)) {
            excerpt = make_excerpt(ctx.message_body, m->first, m->second);
          }
          break;
        case RuleTarget::traffic:
          if (auto m = match(rule, ctx.traffic_line)) {
            excerpt = make_excerpt(ctx.traffic_line, m->first, m->second);
          }
          break;
        case RuleTarget::tool_description:
          for (const auto& tool : ctx.tools) {
            if (auto m = match(rule, tool.description)) {
              excerpt = tool.name + ": " + make_excerpt(tool.description, m->first, m->second);
              break;
            }
          }
          break;
      }
    }
    if (!excerpt) continue;

    if (excerpt->size() > kMaxExcerptBytes) {
      std::size_t cut = kMaxExcerptBytes;
      while (cut > 0 && (static_cast<unsigned char>((*excerpt)[cut]) & 0xC0) == 0x80) --cut;
      excerpt->resize(cut);
    }
    DetectionEvent ev;
    ev.rule_id = spec.id;
    ev.severity = spec.severity;
    ev.action_taken = spec.action;
    ev.peer_ip = ctx.peer_ip;
    ev.client_id = ctx.client_id;
    ev.excerpt = std::move(*excerpt);
    ev.observed_at = now;
    out.events.push_back(std::move(ev));

    out.aggregate = join(out.aggregate, spec.action);
    if (spec.action >= ActionKind::deny) {
      bool protocol = spec.pattern_kind == PatternKind::detector && spec.pattern.starts_with("protocol.");
      (protocol ? protocol_deny : content_deny) = true;
    }
    if (spec.action == ActionKind::ban && spec.ban_ttl >= out.ban_ttl) {
      out.ban_ttl = spec.ban_ttl;
      out.ban_target = spec.ban_target;
      out.ban_reason = spec.id;
    }
  }
  if (out.aggregate == ActionKind::deny && protocol_deny && !content_deny) out.deny_status = 400;
  return out;
}

void DetectionLog::record(const DetectionEvent& e) {
  {
    std::lock_guard lock(mu_);
    events_.push_back(e);
    ++total_;
    while (events_.size() > capacity_) events_.pop_front();
  }
  if (audit_) {
    audit::Summary s{{"rule_id", e.rule_id},
                     {"severity", to_string(e.severity)},
                     {"action", to_string(e.action_taken)},
                     {"peer", e.peer_ip},
                     {"excerpt", e.excerpt}};
    if (e.client_id) s["client_id"] = *e.client_id;
    audit_->append(audit::Kind::detection, s);
  }
}

std::vector<DetectionEvent> DetectionLog::recent(std::size_t limit) const {
  std::lock_guard lock(mu_);
  auto start = events_.size() > limit ? events_.size() - limit : 0;
  return {events_.begin() + static_cast<std::ptrdiff_t>(start), events_.end()};
}

std::size_t DetectionLog::total() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::string error_json(std::string_view error, std::string_view description) {
  return nlohmann::json{{"error", error}, {"error_description", description}}.dump();
}

Enforcement enforce(const RuleSet& rules, const InspectionContext& ctx, policy::BanStore* bans,
                    DetectionLog* log, const Clock& clock) {
  Enforcement out;
  auto now = clock.wall_now();
  out.result = rules.evaluate(ctx, now);
  if (log) {
    for (const auto& e : out.result.events) log->record(e);
  }
  switch (out.result.aggregate) {
    case ActionKind::none:
    case ActionKind::log:
      break;
    case ActionKind::deny: {
      bool protocol = out.result.deny_status == 400;
      out.response = short_circuit(
          out.result.deny_status,
          error_json(protocol ? "invalid_request" : "forbidden",
                     protocol ? "message rejected by protocol validation"
                              : "request blocked by inspection rule"),
          "application/json");
      break;
    }
    case ActionKind::ban: {
      if (bans) {
        policy::BanEntry entry;
        entry.target = out.result.ban_target == BanTarget::client_id && ctx.client_id
                           ? *ctx.client_id
                           : ctx.peer_ip;
        entry.reason = out.result.ban_reason;
        entry.created_at = now;
        entry.expires_at = now + out.result.ban_ttl;
        entry.source = policy::BanSource::detection;
        out.ban = bans->apply(entry);
      }
      out.response = short_circuit(
          403, error_json("forbidden", "request blocked by inspection rule; caller banned"),
          "application/json");
      break;
    }
  }
  return out;
}

}  // namespace mcpgw::inspect
