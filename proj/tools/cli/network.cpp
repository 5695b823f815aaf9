#include "aid/cli/network.hpp"

#include <signal.h>
#include <stdlib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aid/crypto/keccak.hpp"
#include "aid/node/runtime.hpp"

namespace aid::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

crypto::KeyPair key_for(const std::optional<std::string>& seed, const std::string& label) {
  if (seed) return crypto::KeyPair::from_seed(as_bytes(*seed + "/" + label));
  return crypto::KeyPair::generate();
}

std::uint64_t now_seconds() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(duration_cast<seconds>(system_clock::now().time_since_epoch()).count());
}

}  // namespace

InitResult network_init(const InitOptions& opts) {
  if (opts.validators < 4)
    throw CliError(kApplication, "TooFewValidators: need at least 4 validators, got " + std::to_string(opts.validators));
  if (opts.out_dir.empty()) throw CliError(kUsage, "network init needs --out");
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  InitResult res;
  crypto::KeyPair org = key_for(opts.seed, "organization");
  if (opts.org_key_path.empty()) {
    res.org_key_path = (out / "org.key").string();
    node::save_key(res.org_key_path, org);
  } else {
    res.org_key_path = opts.org_key_path;
    org = node::load_key(opts.org_key_path);
  }

  std::vector<crypto::KeyPair> keys;
  for (std::size_t i = 0; i < opts.validators; ++i) keys.push_back(key_for(opts.seed, "validator-" + std::to_string(i)));

  auto& g = res.genesis;
  g.chain_id = opts.chain_id;
  g.organization = org.address();
  for (const auto& k : keys) g.validators.push_back(k.address());
  g.strict_bank_account_mode = opts.strict;
  g.timestamp = opts.seed ? 0 : now_seconds();
  g.validate();
  g.save((out / "genesis.json").string());

  auto listen = [&](std::size_t i) {
    return opts.host + ":" + std::to_string(opts.base_port == 0 ? 0 : opts.base_port + static_cast<int>(i));
  };
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto dir = out / ("node" + std::to_string(i));
    fs::create_directories(dir);
    node::save_key((dir / "key.json").string(), keys[i]);
    node::NodeConfig c;
    c.listen = listen(i);
    c.data_dir = "data";
    c.genesis_path = "../genesis.json";
    c.key_path = "key.json";
    if (i == 0) c.bank_sink = "file:bank_instructions.jsonl";
    if (opts.base_port != 0)
      for (std::size_t j = 0; j < keys.size(); ++j)
        if (j != i) c.peers.push_back("http://" + listen(j));
    const auto path = (dir / "config.json").string();
    std::ofstream f(path, std::ios::trunc);
    f << c.to_json();
    if (!f) throw std::runtime_error("cannot write " + path);
    res.config_paths.push_back(path);
  }
  return res;
}

namespace {

std::vector<std::unique_ptr<node::NodeRuntime>> boot(const std::vector<node::NodeConfig>& cfgs) {
  std::vector<std::unique_ptr<node::NodeRuntime>> nodes;
  for (const auto& c : cfgs) {
    nodes.push_back(std::make_unique<node::NodeRuntime>(c));
    nodes.back()->start();
  }
  // Same-process nodes learn each other's ephemeral ports here.
  std::vector<std::string> urls;
  for (const auto& n : nodes) urls.push_back(n->url());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto peers = cfgs[i].peers;
    if (peers.empty()) peers = urls;
    nodes[i]->set_peers(peers);
  }
  return nodes;
}

}  // namespace

int network_run(const std::vector<std::string>& configs, Output& o) {
  if (configs.empty()) throw CliError(kUsage, "network run needs at least one --config");
  std::vector<node::NodeConfig> cfgs;
  for (const auto& p : configs) cfgs.push_back(node::NodeConfig::load(p, ::getenv));

  // Signals go to sigwait below, not to the worker threads.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto nodes = boot(cfgs);
  for (const auto& n : nodes)
    o.out << "node " << n->url() << " data " << n->config().data_dir << (n->config().key_path.empty() ? " (observer)" : "")
          << "\n";
  o.out.flush();
  int sig = 0;
  sigwait(&set, &sig);
  o.err << "stopping on signal " << sig << "\n";
  node::stop_all(nodes);
  for (const auto& n : nodes)
    if (n->halted()) return kApplication;
  return kOk;
}

namespace {

struct DemoFailure : CliError {
  explicit DemoFailure(const std::string& what) : CliError(kApplication, "demo check failed: " + what) {}
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw DemoFailure(what);
}

}  // namespace

int network_demo(const DemoOptions& opts, Output& o) {
  if (opts.variant != "default" && opts.variant != "allowance-before-registration")
    throw CliError(kUsage, "unknown demo variant " + opts.variant);

  fs::path dir = opts.out_dir;
  bool temp = false;
  if (dir.empty()) {
    std::string tmpl = (fs::temp_directory_path() / "aid-demo-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("cannot create a temporary directory");
    dir = tmpl;
    temp = true;
  }
  struct Cleanup {
    fs::path p;
    bool on;
    ~Cleanup() {
      std::error_code ec;
      if (on) fs::remove_all(p, ec);
    }
  } cleanup{dir, temp};

  const auto t0 = std::chrono::steady_clock::now();
  InitOptions io;
  io.out_dir = dir.string();
  io.seed = "demo";
  io.base_port = 0;
  io.strict = opts.strict;
  auto init = network_init(io);
  auto org = node::load_key(init.org_key_path);
  auto recipient = crypto::KeyPair::from_seed(as_bytes("demo/recipient"));
  node::save_key((dir / "recipient.key").string(), recipient);
  const auto r = recipient.address().to_string();

  std::vector<node::NodeConfig> cfgs;
  auto no_env = [](const char*) -> const char* { return nullptr; };
  for (const auto& p : init.config_paths) cfgs.push_back(node::NodeConfig::load(p, no_env));
  auto nodes = boot(cfgs);
  struct Teardown {
    const std::vector<std::unique_ptr<node::NodeRuntime>>& nodes;
    ~Teardown() { node::stop_all(nodes); }
  } teardown{nodes};
  o.err << "demo network: " << nodes.size() << " validators, quorum " << init.genesis.validator_set().quorum()
        << (opts.strict ? ", strict bank account mode" : "") << "\n";
  for (const auto& n : nodes) o.err << "  " << n->url() << "\n";
  o.err << "organization " << org.address().to_string() << "\nrecipient    " << r << "\n";

  NodeClient writer(nodes[0]->url());
  NodeClient reader(nodes[3]->url());
  SubmitOptions so;
  so.wait = true;
  Output step_out{o.err, o.err, false};

  std::vector<std::pair<std::string, std::vector<std::string>>> script = {
      {"add-funds", {"1000"}},
      {"add-recipient", {r}},
      {"register-account", {r, "IBAN-TEST-001"}},
      {"send-allowance", {r, "300"}},
  };
  if (opts.variant == "allowance-before-registration") script.erase(script.begin() + 2);

  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& [cmd, args] = script[i];
    o.err << "[" << i + 1 << "/" << script.size() << "] org " << cmd;
    for (const auto& a : args) o.err << " " << (cmd == "register-account" && &a == &args[1] ? "\"" + a + "\"" : a);
    o.err << "\n";
    int code;
    try {
      code = submit_payload(writer, org, build_payload(cmd, args), so, step_out);
    } catch (const ApiError& e) {
      o.err << cmd << " rejected by the node: " << e.error << "\n";
      if (opts.variant != "default") o.err << "expected failure observed (allowance before registration)\n";
      node::stop_all(nodes);
      return kApplication;
    }
    if (code != kOk) {
      if (opts.variant != "default") o.err << "expected failure observed (allowance before registration)\n";
      node::stop_all(nodes);
      return code;
    }
  }
  if (opts.variant != "default") {
    // Without strict mode the allowance goes through and its bank
    // instruction has no account to pay into.
    expect(!opts.strict, "strict mode accepted an allowance before registration");
    expect(nodes[0]->flush_sink(5'000), "bank instructions not delivered");
    auto instrs = node::FileWriter::read_all((dir / "node0" / "bank_instructions.jsonl").string());
    expect(instrs.size() == 1 && instrs[0].manual_review(), "expected one instruction flagged for manual review");
    o.out << "allowance finalized before registration; bank instruction flagged for manual review\n";
    return kOk;
  }

  // every validator at the same head
  const auto target = nodes[0]->view()->head;
  for (auto& n : nodes)
    expect(n->wait_for([&](const node::View& v) { return v.head.height >= target.height; }, 10'000),
           "node " + n->url() + " did not reach height " + std::to_string(target.height));
  for (auto& n : nodes) expect(n->view()->blocks->at(target.height)->hash == target.hash, "validators disagree");

  Output quiet{o.err, o.err, false};
  auto bal = reader.get("/balance/" + org.address().to_string());
  expect(bal["balance"] == "700", "organization balance is " + bal["balance"].get<std::string>() + ", want 700");

  auto ev = reader.get("/events", {{"limit", "10000"}});
  std::vector<std::string> types;
  for (const auto& e : ev["events"]) types.push_back(e["type"].get<std::string>());
  const std::vector<std::string> want = {"FundsAdded", "RecipientAdded", "BankAccountRegistered", "AllowanceSent"};
  expect(types == want, "event sequence is " + ev["events"].dump());

  auto rec = reader.get("/recipient/" + r);
  expect(rec["enrolled"] == true && rec["bank_account_registered"] == true, "recipient status " + rec.dump());

  expect(nodes[0]->flush_sink(5'000), "bank instructions not delivered");
  const auto sink_path = (dir / "node0" / "bank_instructions.jsonl").string();
  auto instrs = node::FileWriter::read_all(sink_path);
  expect(instrs.size() == 1, std::to_string(instrs.size()) + " bank instructions, want 1");
  const auto acct = account_bytes("IBAN-TEST-001");
  expect(instrs[0].amount == Amount(300) && instrs[0].recipient == recipient.address() &&
             instrs[0].account_hash == crypto::keccak256(acct),
         "bank instruction " + instrs[0].to_json());

  std::ostringstream audit;
  expect(audit_export(reader, audit, false, quiet) == kOk, "audit conservation");
  if (!opts.export_path.empty()) {
    std::ofstream f(opts.export_path, std::ios::trunc);
    f << audit.str();
    expect(static_cast<bool>(f), "cannot write " + opts.export_path);
  }

  auto head = reader.get("/head");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  node::stop_all(nodes);

  json summary = {{"result", "ok"},
                  {"height", head["height"]},
                  {"state_root", head["state_root"]},
                  {"organization_balance", bal["balance"]},
                  {"events", types},
                  {"bank_instructions", instrs.size()},
                  {"seconds", secs}};
  if (o.json) {
    o.out << summary.dump() << "\n";
  } else {
    o.out << "demo ok: organization balance 700, events";
    for (const auto& t : types) o.out << " " << t;
    o.out << ", 1 bank instruction\n"
          << "state_root " << head["state_root"].get<std::string>() << " at height " << head["height"] << "\n";
  }
  return kOk;
}

}  // namespace aid::cli
