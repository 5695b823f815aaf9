#include "aid/consensus/validation.hpp"

#include <map>
#include <set>

#include "aid/consensus/messages.hpp"

namespace aid::consensus {

ChainHead genesis_head(const Block& genesis, const Address& organization) {
  ChainHead h;
  h.height = genesis.header.height;
  h.hash = genesis.hash();
  h.timestamp = genesis.header.timestamp;
  h.state.aid = ledger::init(organization);
  return h;
}

std::string_view to_string(BlockFault f) {
  switch (f) {
    case BlockFault::None:
      return "None";
    case BlockFault::BadHeight:
      return "BadHeight";
    case BlockFault::BadParent:
      return "BadParent";
    case BlockFault::BadProposer:
      return "BadProposer";
    case BlockFault::BadTimestamp:
      return "BadTimestamp";
    case BlockFault::BadSignature:
      return "BadSignature";
    case BlockFault::BadNonce:
      return "BadNonce";
    case BlockFault::BadTxRoot:
      return "BadTxRoot";
    case BlockFault::BadStateRoot:
      return "BadStateRoot";
  }
  return "Unknown";
}

BlockCheck validate_block(const Block& block, const ChainHead& parent, const ValidatorSet& validators) {
  const auto& h = block.header;
  if (h.height != parent.height + 1) return {BlockFault::BadHeight, {}};
  if (h.parent_hash != parent.hash) return {BlockFault::BadParent, {}};
  if (h.proposer != validators.proposer_for(h.height, h.round)) return {BlockFault::BadProposer, {}};
  if (h.timestamp < parent.timestamp) return {BlockFault::BadTimestamp, {}};
  for (const auto& tx : block.transactions)
    if (!tx.verify()) return {BlockFault::BadSignature, {}};
  if (h.tx_root != tx_root(block.transactions)) return {BlockFault::BadTxRoot, {}};

  auto exec = ledger::execute(parent.state, block.transactions);
  if (!exec) return {BlockFault::BadNonce, {}};
  if (h.state_root != ledger::state_root(exec->state.aid)) return {BlockFault::BadStateRoot, {}};
  return {BlockFault::None, std::move(exec)};
}

bool has_commit_quorum(const Block& block, const ValidatorSet& validators) {
  const auto hash = block.hash();
  std::map<std::uint64_t, std::set<Address>> by_round;
  for (const auto& seal : block.commit_seals) {
    if (!validators.contains(seal.validator)) return false;
    if (!verify_seal(seal, block.header.height, hash)) return false;
    by_round[seal.round].insert(seal.validator);
  }
  for (const auto& [round, signers] : by_round)
    if (signers.size() >= validators.quorum()) return true;
  return false;
}

}  // namespace aid::consensus
