#pragma once

#include "aid/netsim/consensus_node.hpp"

namespace aid::netsim {

struct ClusterOptions {
  std::size_t validators = 4;
  std::size_t observers = 0;
  consensus::EngineConfig engine;
  SimConfig sim;
  /// Validator i's key is derived from "<key_seed>-<i>".
  std::string key_seed = "validator";
};

/// Validators (node ids 0..n-1) followed by observers, all sharing one
/// genesis owned by a deterministic organization key.
class ConsensusCluster {
 public:
  explicit ConsensusCluster(ClusterOptions opts);

  Simulator& sim() { return sim_; }
  ConsensusNode& node(NodeId id) { return *nodes_.at(id); }
  const ConsensusNode& node(NodeId id) const { return *nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  const consensus::ValidatorSet& validators() const { return validators_; }
  const crypto::KeyPair& organization() const { return org_; }
  const crypto::KeyPair& validator_key(std::size_t i) const { return keys_.at(i); }
  const consensus::Block& genesis() const { return genesis_; }

  /// Lowest chain height among `ids`.
  std::uint64_t min_height(const std::vector<NodeId>& ids) const;
  /// Heights at which two of `ids` finalized different blocks.
  std::vector<std::uint64_t> conflicts(const std::vector<NodeId>& ids) const;

 private:
  ClusterOptions opts_;
  crypto::KeyPair org_;
  std::vector<crypto::KeyPair> keys_;
  consensus::ValidatorSet validators_;
  consensus::Block genesis_;
  Simulator sim_;
  std::vector<ConsensusNode*> nodes_;
};

}  // namespace aid::netsim
