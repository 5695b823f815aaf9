#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aid/crypto/identity.hpp"

namespace aid::node {

struct NodeConfig {
  std::string listen = "127.0.0.1:7000";  // host:port, port 0 picks one
  std::string advertise;                   // URL peers reach us at; default http://<listen>
  std::string data_dir = "data";
  std::string genesis_path = "genesis.json";
  std::string key_path;  // empty: observer node
  std::optional<bool> strict_bank_account_mode;  // unset: take the genesis flag
  std::string bank_sink;  // "", "file:<path>", path, or http:// webhook URL
  std::vector<std::string> peers;
  std::uint64_t base_timeout_ms = 500;
  bool empty_blocks = false;

  std::string to_json() const;
  /// Relative paths are resolved against `base_dir`.
  static NodeConfig from_json(const std::string& text, const std::string& base_dir = "");
  /// Loads the file (if `path` is non-empty) and applies AID_* overrides:
  /// AID_LISTEN, AID_ADVERTISE, AID_DATA_DIR, AID_GENESIS, AID_KEY,
  /// AID_STRICT_BANK_ACCOUNT_MODE, AID_BANK_SINK, AID_PEERS (comma list).
  static NodeConfig load(const std::string& path,
                         const std::function<const char*(const char*)>& getenv = nullptr);
  void apply_env(const std::function<const char*(const char*)>& getenv);

  std::string host() const;
  int port() const;
};

/// Key files are JSON {"secret": hex, "address": hex}, mode 0600.
void save_key(const std::string& path, const crypto::KeyPair& key);
/// Throws if the file is unreadable or its address does not match.
crypto::KeyPair load_key(const std::string& path);

}  // namespace aid::node
