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

#include <random>

#include "mcpgw/common/crypto.h"
#include "mcpgw/common/http.h"
#include "mcpgw/common/redact.h"
#include "oracle/sha256_oracle.h"

namespace mcpgw {
namespace {

TEST(Path, NormalizesDotSegments) {
  EXPECT_EQ(normalize_path("/"), "/");
  EXPECT_EQ(normalize_path("/sse"), "/sse");
  EXPECT_EQ(normalize_path("/a/./b/../c"), "/a/c");
  EXPECT_EQ(normalize_path("//a//b/"), "/a/b/");
  EXPECT_EQ(normalize_path("/a/.."), "/");
  EXPECT_EQ(normalize_path("/a/b/."), "/a/b/");
  EXPECT_FALSE(normalize_path("/.."));
  EXPECT_FALSE(normalize_path("/a/../../etc"));
  EXPECT_FALSE(normalize_path("relative"));
  EXPECT_FALSE(normalize_path(""));
}

TEST(Path, NormalizedPathsHaveNoDotSegments) {
  std::mt19937 rng(7);
  const char* parts[] = {"a", "b", ".", "..", "", "sse", "x.y"};
  for (int i = 0; i < 2000; ++i) {
    std::string p;
    int n = rng() % 6;
    for (int k = 0; k < n; ++k) p += std::string("/") + parts[rng() % 7];
    if (p.empty()) p = "/";
    auto norm = normalize_path(p);
    if (!norm) continue;
    ASSERT_EQ(norm->front(), '/');
    EXPECT_EQ(norm->find("/./"), std::string::npos) << p;
    EXPECT_EQ(norm->find("/../"), std::string::npos) << p;
    EXPECT_FALSE(norm->ends_with("/.") || norm->ends_with("/..")) << p;
    EXPECT_EQ(normalize_path(*norm), norm) << "idempotent for " << p;
  }
}

TEST(Host, StripsPortAndLowercases) {
  EXPECT_EQ(normalize_host("HelloWorld.Example.Test:8443"), "helloworld.example.test");
  EXPECT_EQ(normalize_host("[::1]:80"), "::1");
  EXPECT_EQ(normalize_host("oauth.example.test."), "oauth.example.test");
  EXPECT_FALSE(normalize_host(""));
  EXPECT_FALSE(normalize_host(":80"));
  EXPECT_FALSE(normalize_host("bad host"));
  EXPECT_FALSE(normalize_host("a.test:80x"));
}

TEST(Url, ParsesComponents) {
  auto u = parse_url("https://user@Client.Example:8443/cb/x?y=1#frag");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->scheme, "https");
  EXPECT_EQ(u->userinfo, "user");
  EXPECT_EQ(u->host, "client.example");
  EXPECT_EQ(u->port, 8443);
  EXPECT_EQ(u->path, "/cb/x");
  EXPECT_EQ(u->query, "y=1");
  EXPECT_TRUE(u->has_fragment);
  EXPECT_EQ(u->origin(), "https://client.example:8443");

  auto v6 = parse_url("http://[::1]:9000");
  ASSERT_TRUE(v6);
  EXPECT_EQ(v6->host, "::1");
  EXPECT_EQ(v6->path, "/");
  EXPECT_FALSE(parse_url("/relative"));
  EXPECT_FALSE(parse_url("http://host:99999/"));
}

TEST(Params, FormDecoding) {
  std::vector<std::string> dups;
  auto p = parse_params("a=1&b=hello+world&c=%2Fx&a=2&flag", &dups);
  EXPECT_EQ(p["a"], "1");
  EXPECT_EQ(p["b"], "hello world");
  EXPECT_EQ(p["c"], "/x");
  EXPECT_EQ(p["flag"], "");
  ASSERT_EQ(dups.size(), 1u);
  EXPECT_EQ(dups[0], "a");
  EXPECT_EQ(parse_params(encode_params({{"redirect_uri", "https://c/cb?x=1&y"}}))["redirect_uri"],
            "https://c/cb?x=1&y");
}

TEST(Headers, CaseInsensitiveMultimap) {
  Headers h;
  h.add("X-Forwarded-User", "mallory");
  h.add("accept", "text/event-stream");
  h.add("Accept", "application/json");
  EXPECT_EQ(h.count("ACCEPT"), 2u);
  h.set("x-forwarded-user", "alice");
  EXPECT_EQ(h.get_all("X-Forwarded-User"), std::vector<std::string>{"alice"});
  h.remove("accept");
  EXPECT_FALSE(h.contains("Accept"));
}

TEST(HopByHop, KnownHeaders) {
  for (auto h : {"Connection", "transfer-encoding", "Keep-Alive", "Upgrade"}) {
    EXPECT_TRUE(is_hop_by_hop(h)) << h;
  }
  EXPECT_FALSE(is_hop_by_hop("Content-Type"));
  EXPECT_FALSE(is_hop_by_hop("X-Forwarded-User"));
}

TEST(Crypto, Sha256MatchesIndependentOracle) {
  std::mt19937 rng(11);
  for (int len : {0, 1, 55, 56, 63, 64, 65, 119, 1000}) {
    std::string s(len, '\0');
    for (auto& c : s) c = static_cast<char>(rng());
    EXPECT_EQ(crypto::to_hex(crypto::sha256(s)), oracle::hex(oracle::sha256(s))) << len;
  }
}

TEST(Crypto, PkceReferencePair) {
  // RFC 7636 appendix B vector, confirmed by the independent oracle first.
  constexpr std::string_view verifier = "dBjftJeZ4CVP-mB92K27uhbUJU1p1r_wW1gFWFOEjXk";
  constexpr std::string_view challenge = "E9Melhoa2OwvFrEMTJguCHaoeK1t8URWbuGJSstw-cM";
  ASSERT_EQ(oracle::pkce_challenge(verifier), challenge);
  EXPECT_EQ(crypto::pkce_s256(verifier), challenge);
}

TEST(Crypto, VerifierAlphabet) {
  EXPECT_TRUE(crypto::is_valid_pkce_verifier(std::string(43, 'a')));
  EXPECT_TRUE(crypto::is_valid_pkce_verifier(std::string(128, '~')));
  EXPECT_FALSE(crypto::is_valid_pkce_verifier(std::string(42, 'a')));
  EXPECT_FALSE(crypto::is_valid_pkce_verifier(std::string(129, 'a')));
  EXPECT_FALSE(crypto::is_valid_pkce_verifier(std::string(43, '+')));
}

TEST(Crypto, RandomTokensAreUrlSafeAndDistinct) {
  auto a = crypto::random_token(32, "mcpat_");
  auto b = crypto::random_token(32, "mcpat_");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), 6u + 43u);
  EXPECT_EQ(a.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_"),
            std::string::npos);
}

TEST(Crypto, ApiKeyHashing) {
  auto stored = crypto::hash_api_key("s3cret");
  EXPECT_EQ(stored.find("s3cret"), std::string::npos);
  EXPECT_TRUE(crypto::verify_api_key("s3cret", stored));
  EXPECT_FALSE(crypto::verify_api_key("s3creT", stored));
  EXPECT_FALSE(crypto::verify_api_key("s3cret", "garbage"));
  EXPECT_NE(crypto::hash_api_key("s3cret"), stored) << "salted";
}

TEST(Redact, BearerAndMintedHandles) {
  auto tok = crypto::random_token(32, kAccessTokenPrefix);
  auto out = redact_secrets("Authorization: Bearer " + tok + " trailing");
  EXPECT_EQ(out.find(tok), std::string::npos);
  EXPECT_NE(out.find("trailing"), std::string::npos);

  auto code = crypto::random_token(32, kAuthCodePrefix);
  EXPECT_EQ(redact_secrets("see " + code + ".").find(code), std::string::npos);
  EXPECT_EQ(redact_secrets("bearer   abc.def-ghi"), "bearer   [REDACTED]");
}

TEST(Redact, CredentialParameters) {
  EXPECT_EQ(redact_secrets("code=abc123&state=xyz"), "code=[REDACTED]&state=xyz");
  EXPECT_EQ(redact_secrets(R"({"access_token":"zzz","token_type":"Bearer"})"),
            R"({"access_token":"[REDACTED]","token_type":"Bearer"})");
  // JSON-RPC error codes stay readable.
  EXPECT_EQ(redact_secrets(R"({"code":-32600})"), R"({"code":-32600})");
  EXPECT_EQ(redact_secrets("zipcode=123"), "zipcode=123");
}

}  // namespace
}  // namespace mcpgw
