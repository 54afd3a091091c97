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
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/crypto.h"
#include "test_util.h"

namespace mcpgw::audit {
namespace {

// Frozen from tests/oracle/audit_hash_oracle.py, which computes the
// canonical form and chain without touching the C++ code.
constexpr std::string_view kRecord0Canonical =
    R"({"kind":"exchange","observed_at":1760000000000,"seq":0,"summary":{"method":"GET","route":"helloworld-router","status":"200"}})";
constexpr std::string_view kRecord0Hash =
    "a5223de647a385026bb0109a502b57dd052df9dfb2b6455f8bdfa47644facc2c";
constexpr std::string_view kRecord1Hash =
    "2691d49bd72835c0e358623e71254b3b270096826340a0b910b94299aaeb1d16";

Summary record0_summary() {
  return {{"route", "helloworld-router"}, {"method", "GET"}, {"status", "200"}};
}
Summary record1_summary() {
  return {{"event", "token_issued"}, {"subject", "alice"}, {"note", "caf\xc3\xa9 \xe2\x9c\x93"}};
}

TEST(AuditHash, MatchesStandaloneOracle) {
  EXPECT_EQ(canonical_form(0, 1760000000000, Kind::exchange, record0_summary()),
            kRecord0Canonical);
  crypto::Digest zero{};
  auto h0 = compute_hash(zero, 0, 1760000000000, Kind::exchange, record0_summary());
  EXPECT_EQ(crypto::to_hex(h0), kRecord0Hash);
  auto h1 = compute_hash(h0, 1, 1760000000250, Kind::auth_event, record1_summary());
  EXPECT_EQ(crypto::to_hex(h1), kRecord1Hash);
}

TEST(AuditHash, LogProducesOracleChain) {
  FakeClock clock(from_unix_millis(1760000000000));
  AuditLog log({}, clock);
  auto r0 = log.append(Kind::exchange, record0_summary());
  clock.advance(std::chrono::milliseconds(250));
  auto r1 = log.append(Kind::auth_event, record1_summary());
  EXPECT_EQ(r0.prev_hash, crypto::Digest{});
  EXPECT_EQ(crypto::to_hex(r0.hash), kRecord0Hash);
  EXPECT_EQ(r1.prev_hash, r0.hash);
  EXPECT_EQ(crypto::to_hex(r1.hash), kRecord1Hash);
}

TEST(AuditHash, CanonicalFormIsInjectiveOnSampledSummaries) {
  std::mt19937 rng(3);
  std::set<std::string> hashes;
  std::set<std::string> canon;
  const std::string alphabet = "ab\"\\=:,{}\x01 ";
  for (int i = 0; i < 3000; ++i) {
    Summary s;
    int n = rng() % 3;
    for (int k = 0; k < n; ++k) {
      std::string key, value;
      for (int c = rng() % 4; c > 0; --c) key += alphabet[rng() % alphabet.size()];
      for (int c = rng() % 4; c > 0; --c) value += alphabet[rng() % alphabet.size()];
      s[key] = value;
    }
    auto c = canonical_form(0, 0, Kind::exchange, s);
    bool fresh = canon.insert(c).second;
    bool fresh_hash =
        hashes.insert(crypto::to_hex(compute_hash({}, 0, 0, Kind::exchange, s))).second;
    EXPECT_EQ(fresh, fresh_hash);
  }
}

std::vector<std::string> generate_lines(int n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  FakeClock clock;
  AuditLog log({.path = {}, .max_segment_bytes = 0, .retained_in_memory = std::size_t(n)}, clock);
  for (int i = 0; i < n; ++i) {
    clock.advance(std::chrono::milliseconds(rng() % 1000));
    Summary s{{"route", "r" + std::to_string(rng() % 5)},
              {"status", std::to_string(200 + rng() % 300)},
              {"peer", "10.0.0." + std::to_string(rng() % 255)}};
    log.append(static_cast<Kind>(rng() % 5), s);
  }
  std::vector<std::string> lines;
  for (const auto& r : log.tail(n)) lines.push_back(serialize_line(r));
  return lines;
}

TEST(AuditChain, RandomLogsVerify) {
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    auto lines = generate_lines(1 + seed * 7, seed);
    EXPECT_TRUE(is_ok(verify_lines(lines))) << seed;
  }
}

TEST(AuditChain, EveryByteFlipIsDetectedAtItsRecord) {
  auto lines = generate_lines(6, 42);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    for (std::size_t b = 0; b < lines[k].size(); ++b) {
      for (unsigned char mask : {0x01, 0x20, 0x80}) {
        auto tampered = lines;
        tampered[k][b] = static_cast<char>(tampered[k][b] ^ mask);
        auto v = verify_lines(tampered);
        ASSERT_FALSE(is_ok(v)) << "line " << k << " byte " << b;
        EXPECT_EQ(std::get<ChainBroken>(v).first_bad_seq, k) << "line " << k << " byte " << b;
      }
    }
  }
}

TEST(AuditChain, DeletedRecordBreaksAtItsSeq) {
  auto lines = generate_lines(8, 5);
  for (std::size_t k = 0; k + 1 < lines.size(); ++k) {
    auto cut = lines;
    cut.erase(cut.begin() + k);
    auto v = verify_lines(cut);
    ASSERT_FALSE(is_ok(v));
    EXPECT_EQ(std::get<ChainBroken>(v).first_bad_seq, k);
  }
}

TEST(AuditChain, TenThousandRecordsVerifyUnderOneSecond) {
  auto lines = generate_lines(10000, 9);
  auto start = std::chrono::steady_clock::now();
  auto v = verify_lines(lines);
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_TRUE(is_ok(v));
  EXPECT_LT(elapsed, std::chrono::seconds(1));
}

TEST(AuditLog, ParseLineRejectsNonCanonicalText) {
  auto line = generate_lines(1, 1)[0];
  ASSERT_TRUE(parse_line(line));
  EXPECT_FALSE(parse_line(" " + line));
  EXPECT_FALSE(parse_line(line.substr(0, line.size() - 1)));
  EXPECT_FALSE(parse_line("{}"));
}

TEST(AuditLog, PersistsAndRecoversAcrossRestart) {
  test::TempDir dir;
  auto path = dir.path() / "audit.log";
  FakeClock clock;
  {
    AuditLog log({.path = path}, clock);
    log.append(Kind::exchange, {{"status", "200"}});
    log.append(Kind::config_change, {{"route", "x"}});
  }
  {
    AuditLog log({.path = path}, clock);
    EXPECT_EQ(log.next_seq(), 2u);
    log.append(Kind::exchange, {{"status", "404"}});
  }
  auto records = read_file(path);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_TRUE(is_ok(verify_file(path)));
}

TEST(AuditLog, RotationCarriesChainAcrossSegments) {
  test::TempDir dir;
  auto path = dir.path() / "audit.log";
  FakeClock clock;
  {
    AuditLog log({.path = path, .max_segment_bytes = 600}, clock);
    for (int i = 0; i < 30; ++i) log.append(Kind::exchange, {{"i", std::to_string(i)}});
  }
  auto segments = segment_files(path);
  EXPECT_GT(segments.size(), 2u);
  EXPECT_TRUE(is_ok(verify_file(path)));
  auto records = read_file(path);
  int rotations = 0;
  for (const auto& r : records) rotations += r.kind == Kind::rotation;
  EXPECT_EQ(rotations, static_cast<int>(segments.size()) - 1);
}

TEST(AuditLog, WriteFailureFlipsHealthButKeepsServing) {
  test::TempDir dir;
  FakeClock clock;
  AuditLog log({.path = dir.path() / "a.log"}, clock);
  log.append(Kind::exchange, {});
  EXPECT_TRUE(log.healthy());
  log.simulate_write_failure(true);
  auto r = log.append(Kind::exchange, {});
  EXPECT_EQ(r.seq, 1u);
  EXPECT_FALSE(log.healthy());
}

TEST(AuditLog, SummariesAreRedacted) {
  FakeClock clock;
  AuditLog log({}, clock);
  auto token = crypto::random_token(32, "mcpat_");
  auto r = log.append(Kind::auth_event, {{"note", "Bearer " + token}, {"code", "zqx-hidden"}});
  auto line = serialize_line(r);
  EXPECT_EQ(line.find(token), std::string::npos);
  EXPECT_EQ(line.find("zqx-hidden"), std::string::npos);
}

TEST(AuditLog, SubscribersSeeEveryRecordInOrder) {
  FakeClock clock;
  AuditLog log({}, clock);
  std::vector<std::uint64_t> seen;
  auto id = log.subscribe([&](const AuditRecord& r) { seen.push_back(r.seq); });
  for (int i = 0; i < 5; ++i) log.append(Kind::exchange, {});
  log.unsubscribe(id);
  log.append(Kind::exchange, {});
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
}

}  // namespace
}  // namespace mcpgw::audit
