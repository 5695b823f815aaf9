// aidctl: operator command line for the aid ledger network.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aid/cli/network.hpp"

using namespace aid;
using namespace aid::cli;

namespace {

struct Common {
  std::string node_url = "http://127.0.0.1:7000";
  std::string key;
  bool wait = false;
  bool json = false;
  std::uint64_t timeout_ms = 30'000;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--node-url", c.node_url, "Node API base URL")->envname("AID_NODE_URL")->capture_default_str();
  app->add_option("--key", c.key, "Key file")->envname("AID_KEY_FILE");
  app->add_flag("--wait", c.wait, "Wait for finalization and print the receipt");
  app->add_flag("--json-style", c.json, "Machine-readable JSON output");
  app->add_option("--timeout-ms", c.timeout_ms, "How long --wait waits")->capture_default_str();
}

crypto::KeyPair need_key(const Common& c) {
  if (c.key.empty()) throw CliError(kUsage, "this command needs --key");
  return node::load_key(c.key);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"aidctl: keys, network bootstrap, organization transactions and queries for an aid ledger"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Node log output at info level");
  Common c;
  std::function<int()> action;

  // keys
  auto* keys = app.add_subcommand("keys", "Key files")->require_subcommand(1);
  std::string key_out;
  bool force = false;
  auto* gen = keys->add_subcommand("gen", "Generate a key file and print its address");
  gen->add_option("--out,out", key_out, "Key file to write")->required();
  gen->add_flag("--force", force, "Overwrite an existing file");
  add_common(gen, c);
  gen->callback([&] {
    action = [&] {
      if (!force && std::filesystem::exists(key_out)) throw CliError(kApplication, key_out + " exists (use --force)");
      auto k = crypto::KeyPair::generate();
      node::save_key(key_out, k);
      if (c.json)
        std::cout << nlohmann::json{{"address", k.address().to_string()}, {"path", key_out}}.dump() << "\n";
      else
        std::cout << k.address().to_string() << "\n";
      return kOk;
    };
  });

  // network
  auto* net = app.add_subcommand("network", "Local networks")->require_subcommand(1);
  InitOptions init;
  std::string seed;
  auto* ini = net->add_subcommand("init", "Write genesis, validator keys and node configs");
  ini->add_option("--validators,-n", init.validators, "Validator count (at least 4)")->capture_default_str();
  ini->add_option("--out", init.out_dir, "Output directory")->required();
  ini->add_option("--org-key", init.org_key_path, "Existing organization key (default: create <out>/org.key)");
  ini->add_option("--seed", seed, "Derive keys from this seed and use genesis time 0");
  ini->add_option("--host", init.host, "Listen host")->capture_default_str();
  ini->add_option("--base-port", init.base_port, "Node i listens on base-port + i")->capture_default_str();
  ini->add_flag("--strict", init.strict, "strict_bank_account_mode in genesis");
  ini->add_option("--chain-id", init.chain_id)->capture_default_str();
  add_common(ini, c);
  ini->callback([&] {
    action = [&] {
      if (!seed.empty()) init.seed = seed;
      auto res = network_init(init);
      if (c.json) {
        nlohmann::json j = nlohmann::json::parse(res.genesis.to_json());
        j["configs"] = res.config_paths;
        j["org_key"] = res.org_key_path;
        std::cout << j.dump() << "\n";
      } else {
        const auto vs = res.genesis.validator_set();
        std::cout << "genesis " << (std::filesystem::path(init.out_dir) / "genesis.json").string() << ": "
                  << vs.size() << " validators, f=" << vs.max_faulty() << ", quorum=" << vs.quorum() << "\n"
                  << "organization " << res.genesis.organization.to_string() << " (key " << res.org_key_path << ")\n";
        for (const auto& p : res.config_paths) std::cout << "config " << p << "\n";
      }
      return kOk;
    };
  });

  std::vector<std::string> run_configs;
  auto* run = net->add_subcommand("run", "Run one or more nodes in this process until interrupted");
  run->add_option("--config,configs", run_configs, "Node config files")->required();
  add_common(run, c);
  run->callback([&] {
    action = [&] {
      if (verbose) spdlog::set_level(spdlog::level::info);
      Output o{std::cout, std::cerr, c.json};
      return network_run(run_configs, o);
    };
  });

  DemoOptions demo;
  auto* dem = net->add_subcommand("demo", "Boot 4 validators and run the fund/enroll/register/disburse script");
  dem->add_option("--out", demo.out_dir, "Keep the network files here (default: temporary)");
  dem->add_flag("--strict", demo.strict, "Strict bank account mode");
  dem->add_option("--variant", demo.variant, "default | allowance-before-registration")->capture_default_str();
  dem->add_option("--export", demo.export_path, "Write the audit export (CSV) here");
  add_common(dem, c);
  dem->callback([&] {
    action = [&] {
      if (verbose) spdlog::set_level(spdlog::level::info);
      Output o{std::cout, std::cerr, c.json};
      return network_demo(demo, o);
    };
  });

  // org
  auto* org = app.add_subcommand("org", "Organization transactions (signed with --key)")->require_subcommand(1);
  struct OrgCmd {
    const char* name;
    const char* help;
    std::vector<const char*> args;
  };
  const std::vector<OrgCmd> org_cmds = {
      {"add-recipient", "Enroll a recipient", {"address"}},
      {"remove-recipient", "Unenroll a recipient", {"address"}},
      {"register-account", "Register a recipient's bank account (only its keccak-256 is sent)", {"address", "account"}},
      {"add-funds", "Add to the organization balance", {"amount"}},
      {"send-allowance", "Disburse to an enrolled recipient", {"address", "amount"}},
  };
  std::vector<std::vector<std::string>> org_args(org_cmds.size());
  for (std::size_t i = 0; i < org_cmds.size(); ++i) {
    auto* sub = org->add_subcommand(org_cmds[i].name, org_cmds[i].help);
    org_args[i].resize(org_cmds[i].args.size());
    for (std::size_t a = 0; a < org_cmds[i].args.size(); ++a)
      sub->add_option(org_cmds[i].args[a], org_args[i][a], org_cmds[i].args[a])->required();
    add_common(sub, c);
    sub->callback([&, i] {
      action = [&, i] {
        auto payload = build_payload(org_cmds[i].name, org_args[i]);
        auto key = need_key(c);
        NodeClient node(c.node_url);
        Output o{std::cout, std::cerr, c.json};
        return submit_payload(node, key, payload, SubmitOptions{c.wait, c.timeout_ms}, o);
      };
    });
  }

  // query
  auto* query = app.add_subcommand("query", "Read chain state")->require_subcommand(1);
  std::string who;
  auto* bal = query->add_subcommand("balance", "Balance of an address (default: the --key address)");
  bal->add_option("address", who);
  add_common(bal, c);
  bal->callback([&] {
    action = [&] {
      Address a = who.empty() ? need_key(c).address() : parse_address(who);
      Output o{std::cout, std::cerr, c.json};
      return query_balance(NodeClient(c.node_url), a, o);
    };
  });

  auto* rcp = query->add_subcommand("recipient", "Enrollment and bank account status");
  rcp->alias("recipient-status");
  rcp->add_option("address", who)->required();
  add_common(rcp, c);
  rcp->callback([&] {
    action = [&] {
      Output o{std::cout, std::cerr, c.json};
      return query_recipient(NodeClient(c.node_url), parse_address(who), o);
    };
  });

  std::map<std::string, std::string> filters;
  std::string f_type, f_recipient, f_from, f_to, f_offset, f_limit;
  auto* evs = query->add_subcommand("events", "Event log");
  evs->add_option("--type", f_type, "Event type, e.g. AllowanceSent");
  evs->add_option("--recipient", f_recipient);
  evs->add_option("--from-height", f_from);
  evs->add_option("--to-height", f_to);
  evs->add_option("--offset", f_offset);
  evs->add_option("--limit", f_limit);
  add_common(evs, c);
  evs->callback([&] {
    action = [&] {
      for (auto [k, v] : {std::pair{"type", &f_type}, {"recipient", &f_recipient}, {"from_height", &f_from},
                          {"to_height", &f_to}, {"offset", &f_offset}, {"limit", &f_limit}})
        if (!v->empty()) filters[k] = *v;
      Output o{std::cout, std::cerr, c.json};
      return query_events(NodeClient(c.node_url), filters, o);
    };
  });

  std::string audit_out;
  auto* aud = query->add_subcommand("audit-export", "Every event with running totals and a conservation check");
  aud->add_option("--out", audit_out, "Write here instead of stdout");
  add_common(aud, c);
  aud->callback([&] {
    action = [&] {
      Output o{std::cout, std::cerr, c.json};
      NodeClient node(c.node_url);
      if (audit_out.empty()) return audit_export(node, std::cout, c.json, o);
      std::ofstream f(audit_out, std::ios::trunc);
      if (!f) throw CliError(kApplication, "cannot write " + audit_out);
      return audit_export(node, f, c.json, o);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  Output o{std::cout, std::cerr, c.json};
  try {
    return action ? action() : kUsage;
  } catch (...) {
    return report(std::current_exception(), o);
  }
}
