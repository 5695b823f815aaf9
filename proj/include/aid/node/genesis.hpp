#pragma once

#include <string>
#include <vector>

#include "aid/consensus/engine.hpp"

namespace aid::node {

struct GenesisDoc {
  std::string chain_id = "aid-local";
  Address organization;
  std::vector<Address> validators;
  bool strict_bank_account_mode = false;
  std::uint64_t timestamp = 0;  // seconds

  /// Throws std::invalid_argument on duplicate or missing validators.
  void validate() const;
  consensus::ValidatorSet validator_set() const { return consensus::ValidatorSet(validators); }
  consensus::Block block() const { return consensus::genesis_block(organization, timestamp); }
  consensus::ChainHead head() const { return consensus::genesis_head(block(), organization); }

  std::string to_json() const;
  static GenesisDoc from_json(const std::string& text);
  static GenesisDoc load(const std::string& path);
  void save(const std::string& path) const;

  friend bool operator==(const GenesisDoc&, const GenesisDoc&) = default;
};

}  // namespace aid::node
