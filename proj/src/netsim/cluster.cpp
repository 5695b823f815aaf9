#include "aid/netsim/cluster.hpp"

#include <map>

namespace aid::netsim {

namespace {

std::vector<crypto::KeyPair> make_keys(const std::string& seed, std::size_t n) {
  std::vector<crypto::KeyPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(crypto::KeyPair::from_seed(as_bytes(seed + "-" + std::to_string(i))));
  return out;
}

std::vector<Address> addresses(const std::vector<crypto::KeyPair>& keys) {
  std::vector<Address> out;
  for (const auto& k : keys) out.push_back(k.address());
  return out;
}

}  // namespace

ConsensusCluster::ConsensusCluster(ClusterOptions opts)
    : opts_(std::move(opts)),
      org_(crypto::KeyPair::from_seed(as_bytes("organization"))),
      keys_(make_keys(opts_.key_seed, opts_.validators)),
      validators_(addresses(keys_)),
      genesis_(consensus::genesis_block(org_.address(), 0)),
      sim_(opts_.sim) {
  sim_.set_classifier(classify_net);
  const auto head = consensus::genesis_head(genesis_, org_.address());
  for (std::size_t i = 0; i < opts_.validators + opts_.observers; ++i) {
    std::optional<crypto::KeyPair> key;
    if (i < opts_.validators) key = keys_[i];
    auto node = std::make_unique<ConsensusNode>(validators_, key, head, opts_.engine);
    nodes_.push_back(node.get());
    sim_.add_node(std::move(node));
  }
}

std::uint64_t ConsensusCluster::min_height(const std::vector<NodeId>& ids) const {
  std::uint64_t h = UINT64_MAX;
  for (auto id : ids) h = std::min(h, node(id).height());
  return ids.empty() ? 0 : h;
}

std::vector<std::uint64_t> ConsensusCluster::conflicts(const std::vector<NodeId>& ids) const {
  std::map<std::uint64_t, Hash32> seen;
  std::vector<std::uint64_t> out;
  for (auto id : ids) {
    for (const auto& b : node(id).chain()) {
      auto [it, fresh] = seen.try_emplace(b.header.height, b.hash());
      if (!fresh && it->second != b.hash() && (out.empty() || out.back() != b.header.height))
        out.push_back(b.header.height);
    }
  }
  return out;
}

}  // namespace aid::netsim
