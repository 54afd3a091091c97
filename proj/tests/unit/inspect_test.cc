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

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <random>
#include <regex>
#include <set>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/crypto.h"
#include "mcpgw/inspect/mcp_message.h"
#include "mcpgw/inspect/regex.h"
#include "mcpgw/inspect/rules.h"
#include "mcpgw/inspect/tool_scanner.h"

namespace mcpgw::inspect {
namespace {

using nlohmann::json;

json load_fixture(const std::string& rel) {
  std::ifstream in(std::string(MCPGW_FIXTURES_DIR) + "/" + rel);
  return json::parse(in);
}

Regex must_compile(std::string_view p, bool icase = false) {
  auto r = Regex::compile(p, icase);
  if (auto* err = std::get_if<RegexError>(&r)) {
    ADD_FAILURE() << p << ": " << err->message;
    return std::get<Regex>(Regex::compile("x"));
  }
  return std::get<Regex>(std::move(r));
}

TEST(Regex, BasicConstructs) {
  EXPECT_TRUE(must_compile("ab+c").contains_match("xxabbbc"));
  EXPECT_FALSE(must_compile("^ab").contains_match("cab"));
  EXPECT_TRUE(must_compile("a{2,3}$").contains_match("baaa"));
  EXPECT_TRUE(must_compile("[^0-9]x").contains_match("1ax"));
  EXPECT_TRUE(must_compile(R"(\bcat\b)").contains_match("a cat!"));
  EXPECT_FALSE(must_compile(R"(\bcat\b)").contains_match("concatenate"));
  EXPECT_TRUE(must_compile("(?:foo|bar)baz").contains_match("barbaz"));
  EXPECT_TRUE(must_compile("IGNORE", true).contains_match("please ignore this"));
  EXPECT_TRUE(must_compile(R"(\x41\d\s)").contains_match("A7 "));
  auto m = must_compile("b+").search("aabbbc");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->begin, 2u);
}

TEST(Regex, RejectsUnsupportedAndMalformed) {
  for (auto p : {"(a", "a)", "[abc", "*a", R"((a)\1)", "(?=a)", "(?!a)", "a{1001}", "a{3,2}",
                 R"(\)"}) {
    EXPECT_TRUE(std::holds_alternative<RegexError>(Regex::compile(p))) << p;
  }
}

TEST(Regex, LinearOnPathologicalInput) {
  // Catastrophic for a backtracker; the NFA simulation stays fast.
  auto re = must_compile("(a+)+$");
  std::string input(20000, 'a');
  input += 'b';
  auto start = std::chrono::steady_clock::now();
  EXPECT_FALSE(re.contains_match(input));
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

std::string random_pattern(std::mt19937& rng, int depth = 0) {
  static const char* atoms[] = {"a", "b", ".", "[ab]", "[^a]", "c"};
  std::string p;
  int n = 1 + rng() % 3;
  for (int i = 0; i < n; ++i) {
    std::string atom = (depth < 2 && rng() % 4 == 0) ? "(" + random_pattern(rng, depth + 1) + ")"
                                                     : atoms[rng() % 6];
    switch (rng() % 6) {
      case 0: atom += "*"; break;
      case 1: atom += "+"; break;
      case 2: atom += "?"; break;
      case 3: atom += "{1,2}"; break;
      default: break;
    }
    p += atom;
  }
  if (depth < 2 && rng() % 5 == 0) p += "|" + random_pattern(rng, depth + 1);
  return p;
}

TEST(Regex, DifferentialAgainstStdRegex) {
  // std::regex (ECMAScript) agrees on match existence and on the leftmost
  // start position for this backreference-free subset.
  std::mt19937 rng(99);
  for (int i = 0; i < 1500; ++i) {
    auto pattern = random_pattern(rng);
    std::string input;
    for (int k = rng() % 10; k > 0; --k) input += "abc"[rng() % 3];
    auto ours = must_compile(pattern).search(input);
    std::smatch m;
    bool theirs = std::regex_search(input, m, std::regex(pattern));
    ASSERT_EQ(ours.has_value(), theirs) << pattern << " on " << input;
    if (theirs) {
      EXPECT_EQ(ours->begin, static_cast<std::size_t>(m.position(0))) << pattern;
    }
  }
}

TEST(Protocol, ExampleMessages) {
  EXPECT_TRUE(validate_mcp_message(
                  R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{"capabilities":{}}})",
                  Direction::client_to_server)
                  .ok());
  auto v = validate_mcp_message(R"({"jsonrpc":"1.0","id":1,"method":"ping"})",
                                Direction::client_to_server);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0].code, "bad_envelope");
  v = validate_mcp_message("not json at all", Direction::client_to_server);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0].code, "not_json");
}

TEST(Protocol, OversizeIsNotParsed) {
  std::string body(kMaxMessageBytes + 1, '{');
  auto v = validate_mcp_message(body, Direction::client_to_server);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0].code, "oversize");
}

TEST(Protocol, SeededMalformedMessagesYieldOneViolationEach) {
  auto cases = load_fixture("protocol/malformed.json");
  ASSERT_EQ(cases.size(), 10u);
  for (const auto& c : cases) {
    auto v = validate_mcp_message(c["body"].get<std::string>(), Direction::client_to_server);
    ASSERT_EQ(v.violations.size(), 1u) << c["name"];
    EXPECT_EQ(v.violations[0].code, c["expected_code"].get<std::string>()) << c["name"];
  }
}

TEST(Protocol, SeededWellFormedMessagesPass) {
  auto cases = load_fixture("protocol/wellformed.json");
  ASSERT_EQ(cases.size(), 10u);
  for (const auto& c : cases) {
    auto v = validate_mcp_message(c["body"].get<std::string>(), Direction::client_to_server);
    EXPECT_TRUE(v.ok()) << c["name"] << ": " << (v.ok() ? "" : v.violations[0].detail);
  }
}

TEST(Protocol, ResponsesAndServerRequests) {
  EXPECT_TRUE(validate_mcp_message(R"({"jsonrpc":"2.0","id":1,"result":{}})",
                                   Direction::server_to_client)
                  .ok());
  EXPECT_FALSE(validate_mcp_message(R"({"jsonrpc":"2.0","id":1,"result":{},"error":{}})",
                                    Direction::server_to_client)
                   .ok());
  EXPECT_TRUE(validate_mcp_message(R"({"jsonrpc":"2.0","id":"s1","method":"roots/list"})",
                                   Direction::server_to_client)
                  .ok());
  EXPECT_FALSE(validate_mcp_message(R"({"jsonrpc":"2.0","id":"s1","method":"tools/call","params":{"name":"x"}})",
                                    Direction::server_to_client)
                   .ok());
}

TEST(ToolScanner, CleanAndInvisible) {
  std::vector<ToolDescriptor> clean{{"add", "Adds two numbers.", json::object()}};
  EXPECT_TRUE(scan_tool_descriptions(clean).empty());
  std::vector<ToolDescriptor> zw{{"add", "Adds two\xe2\x80\x8bnumbers.", json::object()}};
  auto f = scan_tool_descriptions(zw);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].rule_id, "builtin.poison.invisible_chars");
  EXPECT_NE(f[0].excerpt.find("\\u{200B}"), std::string::npos);
}

TEST(ToolScanner, CorpusMatchesManifestExactly) {
  auto tools = tools_from_json(load_fixture("poisoning/corpus.json"));
  auto manifest = load_fixture("poisoning/manifest.json");
  ASSERT_EQ(tools.size(), 24u);
  std::map<std::string, std::set<std::string>> flagged;
  for (const auto& f : scan_tool_descriptions(tools)) flagged[f.tool_name].insert(f.detector);
  for (auto& [name, dets] : manifest["poisoned"].items()) {
    std::set<std::string> want(dets.begin(), dets.end());
    EXPECT_EQ(flagged[name], want) << name;
  }
  for (const auto& name : manifest["clean"]) {
    EXPECT_TRUE(flagged[name.get<std::string>()].empty()) << name;
  }
}

TEST(ToolScanner, Deterministic) {
  auto tools = tools_from_json(load_fixture("poisoning/corpus.json"));
  EXPECT_EQ(scan_tool_descriptions(tools), scan_tool_descriptions(tools));
}

TEST(ToolScanner, ExcerptsAreBoundedAndRedacted) {
  auto token = crypto::random_token(32, "mcpat_");
  std::string desc = std::string(300, 'x') + " ignore previous instructions Bearer " + token +
                     std::string(300, 'y');
  std::vector<ToolDescriptor> tools{{"t", desc, json::object()}};
  for (const auto& f : scan_tool_descriptions(tools)) {
    EXPECT_LE(f.excerpt.size(), kMaxExcerptBytes);
    EXPECT_EQ(f.excerpt.find(token), std::string::npos);
  }
}

ThreatRuleSpec custom(std::string id, std::string pattern, ActionKind action,
                      PatternKind kind = PatternKind::literal) {
  ThreatRuleSpec s;
  s.id = std::move(id);
  s.pattern = std::move(pattern);
  s.pattern_kind = kind;
  s.action = action;
  if (action == ActionKind::ban) s.ban_ttl = std::chrono::seconds(600);
  return s;
}

RuleSet must_rules(const std::vector<ThreatRuleSpec>& specs) {
  auto r = RuleSet::compile(specs);
  if (auto* d = std::get_if<std::vector<RuleDiagnostic>>(&r)) {
    ADD_FAILURE() << (*d)[0].path << ": " << (*d)[0].message;
    return std::get<RuleSet>(RuleSet::compile({}));
  }
  return std::get<RuleSet>(std::move(r));
}

TEST(Rules, FailClosedCompilation) {
  auto bad_regex = RuleSet::compile({custom("r1", "(unclosed", ActionKind::deny, PatternKind::regex)});
  ASSERT_TRUE(std::holds_alternative<std::vector<RuleDiagnostic>>(bad_regex));
  EXPECT_EQ(std::get<std::vector<RuleDiagnostic>>(bad_regex)[0].path, "rules[0].pattern");

  auto dup = RuleSet::compile({custom("r", "a", ActionKind::log), custom("r", "b", ActionKind::log)});
  EXPECT_TRUE(std::holds_alternative<std::vector<RuleDiagnostic>>(dup));

  auto no_ttl = custom("r", "a", ActionKind::ban);
  no_ttl.ban_ttl = std::chrono::seconds(0);
  EXPECT_TRUE(std::holds_alternative<std::vector<RuleDiagnostic>>(RuleSet::compile({no_ttl})));

  ThreatRuleSpec unknown;
  unknown.id = "builtin.poison.nope";
  unknown.pattern_kind = PatternKind::detector;
  EXPECT_TRUE(std::holds_alternative<std::vector<RuleDiagnostic>>(RuleSet::compile({unknown})));
}

TEST(Rules, NoMatchesMeansNoEvents) {
  auto rules = must_rules({});
  InspectionContext ctx;
  ctx.message_body = R"({"jsonrpc":"2.0","id":1,"method":"ping"})";
  auto r = rules.evaluate(ctx, WallTime{});
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.aggregate, ActionKind::none);
}

TEST(Rules, ProtocolDenyIs400) {
  auto rules = must_rules({});
  std::vector<Violation> v{{"bad_envelope", "jsonrpc must be \"2.0\""}};
  InspectionContext ctx;
  ctx.violations = v;
  auto r = rules.evaluate(ctx, WallTime{});
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].rule_id, "builtin.protocol.bad_envelope");
  EXPECT_EQ(r.aggregate, ActionKind::deny);
  EXPECT_EQ(r.deny_status, 400);
}

TEST(Rules, BuiltinOverrideToBanCreatesEntry) {
  ThreatRuleSpec override_spec;
  override_spec.id = "builtin.poison.invisible_chars";
  override_spec.pattern_kind = PatternKind::detector;
  override_spec.severity = Severity::high;
  override_spec.action = ActionKind::ban;
  override_spec.ban_ttl = std::chrono::seconds(600);
  auto rules = must_rules({override_spec});

  FakeClock clock;
  audit::AuditLog audit({}, clock);
  policy::BanStore bans({}, clock, &audit);
  DetectionLog log(&audit);
  std::vector<ToolDescriptor> tools{{"t", "x\xe2\x80\x8by", json::object()}};
  auto findings = scan_tool_descriptions(tools);
  InspectionContext ctx;
  ctx.peer_ip = "203.0.113.7";
  ctx.findings = findings;
  auto e = enforce(rules, ctx, &bans, &log, clock);
  ASSERT_TRUE(e.response);
  EXPECT_EQ(e.response->response.status, 403);
  ASSERT_TRUE(e.ban);
  EXPECT_EQ(e.ban->expires_at - e.ban->created_at, std::chrono::seconds(600));
  EXPECT_TRUE(bans.check("203.0.113.7", std::nullopt, clock.wall_now()));
  ASSERT_EQ(log.recent().size(), 1u);
  EXPECT_EQ(log.recent()[0].action_taken, ActionKind::ban);
}

TEST(Rules, AggregateIsJoinOverRandomSubsets) {
  const ActionKind actions[] = {ActionKind::log, ActionKind::deny, ActionKind::ban};
  std::mt19937 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<ThreatRuleSpec> specs;
    std::string body = "payload:";
    ActionKind expected = ActionKind::none;
    int matched = 0;
    for (int i = 0; i < 6; ++i) {
      auto action = actions[rng() % 3];
      std::string marker = "m" + std::to_string(i) + "x";
      specs.push_back(custom("rule" + std::to_string(i), marker, action));
      if (rng() % 2) {
        body += marker + " ";
        expected = join(expected, action);
        ++matched;
      }
    }
    auto rules = must_rules(specs);
    InspectionContext ctx;
    ctx.message_body = body;
    auto r = rules.evaluate(ctx, WallTime{});
    EXPECT_EQ(r.aggregate, expected);
    EXPECT_EQ(static_cast<int>(r.events.size()), matched);
  }
}

TEST(Rules, ExcerptsNeverCarryBearerTokens) {
  auto rules = must_rules({custom("r.secret", "exfil", ActionKind::log, PatternKind::iliteral)});
  std::mt19937 rng(8);
  for (int i = 0; i < 200; ++i) {
    auto token = crypto::random_token(8 + rng() % 40, rng() % 2 ? "" : "mcpat_");
    std::string body = std::string(rng() % 80, 'z') + "Bearer " + token + " EXFIL " +
                       std::string(rng() % 80, 'q');
    InspectionContext ctx;
    ctx.message_body = body;
    for (const auto& ev : rules.evaluate(ctx, WallTime{}).events) {
      EXPECT_EQ(ev.excerpt.find(token), std::string::npos) << body;
    }
  }
}

TEST(Rules, RegexRuleOnTrafficTarget) {
  auto spec = custom("r.ua", "^curl/", ActionKind::deny, PatternKind::iregex);
  spec.target = RuleTarget::traffic;
  auto rules = must_rules({spec});
  InspectionContext ctx;
  ctx.traffic_line = "CURL/8.1 POST /messages";
  auto r = rules.evaluate(ctx, WallTime{});
  EXPECT_EQ(r.aggregate, ActionKind::deny);
  EXPECT_EQ(r.deny_status, 403);
}

}  // namespace
}  // namespace mcpgw::inspect
