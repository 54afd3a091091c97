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

#include "mcpgw/cli/cli.h"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <thread>

#include "mcpgw/admin/admin_api.h"
#include "mcpgw/audit/audit_log.h"
#include "mcpgw/common/crypto.h"
#include "mcpgw/config/config.h"
#include "mcpgw/gateway/runtime.h"
#include "mcpgw/oauth/auth_server.h"

namespace mcpgw::cli {
namespace {

volatile std::sig_atomic_t g_signalled = 0;

extern "C" void on_signal(int) { g_signalled = 1; }

void print_diagnostics(const config::Diagnostics& d, std::ostream& err) {
  for (const auto& x : d) err << "error: " << config::format(x) << "\n";
}

std::optional<config::SnapshotPtr> load(const std::string& path, std::ostream& err) {
  auto loaded = config::load_config_file(path, config::process_env());
  if (auto* d = std::get_if<config::Diagnostics>(&loaded)) {
    print_diagnostics(*d, err);
    return std::nullopt;
  }
  return std::get<config::SnapshotPtr>(loaded);
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  auto snap = load(path, err);
  if (!snap) return kExitFailure;
  const auto& c = (*snap)->config();
  out << "ok: " << c.routers.size() << " routes, " << c.backends.size() << " backends, "
      << c.middlewares.size() << " middlewares, " << c.rules.size() << " custom rules\n";
  return kExitOk;
}

int cmd_audit_verify(const std::string& path, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    err << "error: cannot read audit log '" << path << "': file not found\n";
    return kExitFailure;
  }
  auto verdict = audit::verify_file(path);
  if (auto* bad = std::get_if<audit::ChainBroken>(&verdict)) {
    out << "broken\nfirst_bad_seq: " << bad->first_bad_seq << "\nreason: " << bad->reason << "\n";
    return kExitFailure;
  }
  out << "ok: " << audit::read_file(path).size() << " records\n";
  return kExitOk;
}

int cmd_token_mint(const std::string& config_path, const std::string& subject,
                   const std::string& host, const std::string& scope, bool dev, std::ostream& out,
                   std::ostream& err) {
  if (!dev) {
    err << "error: token mint is a test facility and is disabled unless --dev is given\n";
    return kExitFailure;
  }
  auto snap = load(config_path, err);
  if (!snap) return kExitFailure;
  const auto& c = (*snap)->config();
  if (c.state_dir.empty()) {
    err << "error: state_dir is empty, so a minted token would not reach a running gateway\n";
    return kExitFailure;
  }
  if (!(*snap)->is_route_host(host)) {
    err << "error: '" << host << "' is not the host of any route\n";
    return kExitFailure;
  }
  oauth::OAuthSettings os;
  os.issuer_host = c.oauth.issuer_host;
  os.public_scheme = c.oauth.public_scheme;
  os.public_port = c.oauth.public_port;
  os.stub_idp_users = c.oauth.stub_idp_users;
  os.state_dir = std::filesystem::path(c.state_dir) / "oauth";
  // No audit sink: the running gateway owns the chain and a second writer
  // would fork it.
  oauth::AuthorizationServer as(os, nullptr, SystemClock::instance(), nullptr,
                                [snap](std::string_view h) { return (*snap)->is_route_host(h); });
  out << as.mint_token(subject, host, scope) << "\n";
  return kExitOk;
}

int cmd_hash_key(std::string key, std::ostream& out, std::ostream& err) {
  if (key.empty()) std::getline(std::cin, key);
  if (key.empty()) {
    err << "error: no key given\n";
    return kExitFailure;
  }
  out << crypto::hash_api_key(key) << "\n";
  return kExitOk;
}

int cmd_run(const std::string& path, std::ostream& out, std::ostream& err,
            const RunControl& control) {
  auto snap = load(path, err);
  if (!snap) return kExitFailure;
  auto cfg = (*snap)->config();
  auto made = gateway::Runtime::create(cfg);
  if (auto* d = std::get_if<config::Diagnostics>(&made)) {
    print_diagnostics(*d, err);
    return kExitFailure;
  }
  auto rt = std::move(std::get<std::unique_ptr<gateway::Runtime>>(made));
  if (auto e = rt->start()) {
    err << "error: " << *e << "\n";
    return kExitFailure;
  }
  std::map<std::string, int> ports;
  for (const auto& ep : cfg.entry_points) ports[ep.name] = rt->port(ep.name);
  std::unique_ptr<admin::AdminService> admin;
  if (!cfg.admin.address.empty()) {
    auto svc = admin::AdminService::create(*rt, cfg.admin);
    if (auto* e = std::get_if<std::string>(&svc)) {
      err << "error: " << *e << "\n";
      rt->stop();
      return kExitFailure;
    }
    admin = std::move(std::get<std::unique_ptr<admin::AdminService>>(svc));
    admin->start();
    ports["admin"] = admin->port();
  }
  for (const auto& [name, port] : ports) out << "listening " << name << " port " << port << "\n";
  out.flush();
  if (control.on_ready) control.on_ready(ports);

  if (!control.stop) {
    g_signalled = 0;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
  }
  auto stopped = [&] { return control.stop ? control.stop->load() : g_signalled != 0; };
  while (!stopped()) std::this_thread::sleep_for(std::chrono::milliseconds(100));

  if (admin) admin->stop();
  rt->stop();
  out << "stopped\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const RunControl& control) {
  CLI::App app{"MCP security gateway", "mcpgw"};
  app.require_subcommand(1);

  std::string config_path;
  bool dev = false;
  auto* run = app.add_subcommand("run", "Start the gateway");
  run->add_option("--config", config_path, "Gateway config file")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "Check a config file and exit");
  validate->add_option("path", validate_path, "Gateway config file")->required();

  std::string audit_path;
  auto* audit_cmd = app.add_subcommand("audit", "Audit log tools");
  audit_cmd->require_subcommand(1);
  auto* verify = audit_cmd->add_subcommand("verify", "Recompute the hash chain");
  verify->add_option("path", audit_path, "Audit log file")->required();

  std::string subject, host, scope(oauth::kBaseScope), mint_config;
  auto* token = app.add_subcommand("token", "Test token tools");
  token->require_subcommand(1);
  auto* mint = token->add_subcommand("mint", "Issue a bearer token without the OAuth flow");
  mint->add_option("--subject", subject, "Token subject")->required();
  mint->add_option("--host", host, "Resource host the token is bound to")->required();
  mint->add_option("--scope", scope, "Space-separated scopes");
  mint->add_option("--config", mint_config, "Gateway config file")->required();
  mint->add_flag("--dev", dev, "Required; minting is a test facility");

  std::string key;
  auto* hash = app.add_subcommand("hash-admin-key", "Print the salted hash of an admin key");
  hash->add_option("key", key, "The key; read from stdin when omitted");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out, err, control);
    if (*validate) return cmd_validate(validate_path, out, err);
    if (*verify) return cmd_audit_verify(audit_path, out, err);
    if (*mint) return cmd_token_mint(mint_config, subject, host, scope, dev, out, err);
    if (*hash) return cmd_hash_key(key, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace mcpgw::cli
