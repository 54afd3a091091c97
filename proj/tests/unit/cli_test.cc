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
#include <httplib.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "mcpgw/audit/audit_log.h"
#include "mcpgw/cli/cli.h"
#include "mcpgw/common/crypto.h"
#include "mcpgw/testkit/mock_mcp_server.h"

namespace mcpgw {
namespace {

namespace fs = std::filesystem;

struct Ran {
  int code;
  std::string out;
  std::string err;
};

Ran cli(std::vector<std::string> args, const cli::RunControl& control = {}) {
  std::ostringstream out, err;
  int code = cli::cli_main(args, out, err, control);
  return {code, out.str(), err.str()};
}

struct TempDir {
  TempDir() : path(fs::temp_directory_path() / ("mcpgw-cli-" + crypto::random_token(6))) {
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
  fs::path path;
};

std::string example_config() { return std::string(MCPGW_SOURCE_DIR) + "/config/gateway.example.yaml"; }

/// Ephemeral ports, state under `state`, one protected route to `upstream`.
std::string run_config(const fs::path& state, const std::string& upstream) {
  return "entry_points:\n"
         "  - name: web\n"
         "    address: \"127.0.0.1:0\"\n"
         "admin:\n"
         "  address: \"127.0.0.1:0\"\n"
         "  keys:\n"
         "    - name: ops\n"
         "      key_hash: \"" + crypto::hash_api_key("cli-test-key") + "\"\n"
         "      permissions: write\n"
         "oauth:\n"
         "  issuer_host: oauth.example.test\n"
         "state_dir: \"" + state.string() + "\"\n"
         "routers:\n"
         "  - id: r\n"
         "    host_rule: app.example.test\n"
         "    middleware_ids: [auth]\n"
         "    backend_id: b\n"
         "middlewares:\n"
         "  - id: auth\n"
         "    type: forward_auth\n"
         "backends:\n"
         "  - id: b\n"
         "    display_name: B\n"
         "    upstream_url: \"" + upstream + "\"\n";
}

TEST(Cli, UnknownSubcommandPrintsUsageAndExits2) {
  auto r = cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("validate-config"), std::string::npos) << r.err;
}

TEST(Cli, NoSubcommandExits2) { EXPECT_EQ(cli({}).code, cli::kExitUsage); }

TEST(Cli, HelpExits0) {
  auto r = cli({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("audit"), std::string::npos);
}

TEST(Cli, BinaryUsesTheSameExitCodes) {
  auto status = std::system((std::string(MCPGW_CLI_PATH) + " frobnicate >/dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  status = std::system(
      (std::string(MCPGW_CLI_PATH) + " validate-config " + example_config() + " >/dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

TEST(Cli, ValidateShippedExampleConfig) {
  auto r = cli({"validate-config", example_config()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("1 routes"), std::string::npos) << r.out;
}

TEST(Cli, ValidateReportsDiagnosticsWithPaths) {
  TempDir dir;
  auto p = dir.write("bad.yaml",
                     "entry_points:\n  - name: web\n    address: \"127.0.0.1:0\"\n"
                     "oauth:\n  issuer_host: oauth.example.test\n"
                     "routers:\n  - id: r\n    host_rule: a.example.test\n    backend_id: nope\n");
  auto r = cli({"validate-config", p.string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("routers[0].backend_id"), std::string::npos) << r.err;
}

TEST(Cli, RunWithMissingConfigExits1WithFileNotFound) {
  auto r = cli({"run", "--config", "/nonexistent/missing.yaml"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("file not found"), std::string::npos) << r.err;
}

TEST(Cli, AuditVerifyAcceptsIntactAndPinpointsTampering) {
  TempDir dir;
  auto log_path = dir.path / "audit.log";
  {
    audit::AuditLogOptions o;
    o.path = log_path;
    FakeClock clock;
    audit::AuditLog log(o, clock);
    for (int i = 0; i < 5; ++i) log.append(audit::Kind::exchange, {{"status", "200"}});
  }
  auto ok = cli({"audit", "verify", log_path.string()});
  EXPECT_EQ(ok.code, cli::kExitOk) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("5 records"), std::string::npos);

  std::vector<std::string> lines;
  {
    std::ifstream in(log_path);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  ASSERT_EQ(lines.size(), 5u);
  auto pos = lines[2].find("\"200\"");
  ASSERT_NE(pos, std::string::npos);
  lines[2].replace(pos, 5, "\"500\"");
  {
    std::ofstream out(log_path, std::ios::trunc);
    for (const auto& l : lines) out << l << "\n";
  }
  auto bad = cli({"audit", "verify", log_path.string()});
  EXPECT_EQ(bad.code, cli::kExitFailure);
  EXPECT_NE(bad.out.find("first_bad_seq: 2"), std::string::npos) << bad.out;

  EXPECT_EQ(cli({"audit", "verify", (dir.path / "absent.log").string()}).code,
            cli::kExitFailure);
}

TEST(Cli, HashAdminKeyOutputVerifies) {
  auto r = cli({"hash-admin-key", "s3cret"});
  ASSERT_EQ(r.code, cli::kExitOk);
  auto hash = r.out.substr(0, r.out.find('\n'));
  EXPECT_TRUE(crypto::verify_api_key("s3cret", hash));
  EXPECT_FALSE(crypto::verify_api_key("other", hash));
  EXPECT_EQ(r.out.find("s3cret"), std::string::npos);
}

TEST(Cli, TokenMintRequiresDev) {
  TempDir dir;
  auto cfg = dir.write("g.yaml", run_config(dir.path / "state", "http://127.0.0.1:1/"));
  auto r = cli({"token", "mint", "--config", cfg.string(), "--subject", "alice", "--host",
                "app.example.test"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("--dev"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  r = cli({"token", "mint", "--config", cfg.string(), "--subject", "alice", "--host",
           "unknown.example.test", "--dev"});
  EXPECT_EQ(r.code, cli::kExitFailure);
}

TEST(Cli, RunServesAndAcceptsTokensMintedOutOfProcess) {
  testkit::MockMcpServer mock;
  mock.start();
  TempDir dir;
  auto cfg = dir.write("g.yaml", run_config(dir.path / "state", mock.url()));

  std::atomic<bool> stop{false};
  std::promise<std::map<std::string, int>> ready;
  cli::RunControl control;
  control.stop = &stop;
  control.on_ready = [&](const std::map<std::string, int>& ports) { ready.set_value(ports); };
  auto running = std::async(std::launch::async, [&] { return cli({"run", "--config", cfg.string()}, control); });
  auto fut = ready.get_future();
  ASSERT_EQ(fut.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  auto ports = fut.get();
  ASSERT_GT(ports["web"], 0);
  ASSERT_GT(ports["admin"], 0);
  EXPECT_NE(ports["web"], ports["admin"]);

  auto minted = cli({"token", "mint", "--config", cfg.string(), "--subject", "alice", "--host",
                     "app.example.test", "--dev"});
  ASSERT_EQ(minted.code, cli::kExitOk) << minted.err;
  auto token = minted.out.substr(0, minted.out.find('\n'));

  httplib::Client web("127.0.0.1", ports["web"]);
  auto anon = web.Get("/health", {{"Host", "app.example.test"}});
  ASSERT_TRUE(anon);
  EXPECT_EQ(anon->status, 401);
  auto authed = web.Get("/health", {{"Host", "app.example.test"}, {"Authorization", "Bearer " + token}});
  ASSERT_TRUE(authed);
  EXPECT_EQ(authed->status, 200);

  httplib::Client admin("127.0.0.1", ports["admin"]);
  auto h = admin.Get("/admin/health", {{"X-Admin-Key", "cli-test-key"}});
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);

  stop = true;
  ASSERT_EQ(running.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  auto r = running.get();
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("stopped"), std::string::npos);
  EXPECT_TRUE(audit::is_ok(audit::verify_file(dir.path / "state" / "audit.log")));
}

}  // namespace
}  // namespace mcpgw
