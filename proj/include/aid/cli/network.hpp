#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aid/cli/commands.hpp"
#include "aid/node/config.hpp"
#include "aid/node/genesis.hpp"

namespace aid::cli {

struct InitOptions {
  std::size_t validators = 4;
  std::string out_dir;
  std::string org_key_path;  // empty: create <out>/org.key
  std::optional<std::string> seed;  // deterministic keys and genesis time 0
  std::string host = "127.0.0.1";
  int base_port = 7000;
  bool strict = false;
  std::string chain_id = "aid-local";
};

struct InitResult {
  node::GenesisDoc genesis;
  std::vector<std::string> config_paths;
  std::string org_key_path;
};

/// Writes genesis.json, the organization key (unless given) and
/// node<i>/{key.json,config.json}. Throws CliError("TooFewValidators") for n < 4.
InitResult network_init(const InitOptions& opts);

/// Runs the nodes described by `configs` in this process until SIGINT or
/// SIGTERM.
int network_run(const std::vector<std::string>& configs, Output& o);

struct DemoOptions {
  std::string out_dir;  // empty: temporary, removed afterwards
  bool strict = false;
  std::string variant = "default";  // or "allowance-before-registration"
  std::string export_path;  // optional audit export
};

/// Boots four validators in-process on ephemeral ports, runs the canonical
/// organization script through the HTTP API, and checks the outcome.
int network_demo(const DemoOptions& opts, Output& o);

}  // namespace aid::cli
