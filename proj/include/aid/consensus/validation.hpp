#pragma once

#include <optional>
#include <string_view>

#include "aid/consensus/block.hpp"
#include "aid/consensus/validator_set.hpp"

namespace aid::consensus {

/// The finalized tip a new block must extend.
struct ChainHead {
  std::uint64_t height = 0;
  Hash32 hash;
  std::uint64_t timestamp = 0;
  ledger::LedgerState state;
};

ChainHead genesis_head(const Block& genesis, const Address& organization);

enum class BlockFault {
  None,
  BadHeight,
  BadParent,
  BadProposer,
  BadTimestamp,
  BadSignature,
  BadNonce,
  BadTxRoot,
  BadStateRoot,
};

std::string_view to_string(BlockFault f);

struct BlockCheck {
  BlockFault fault = BlockFault::None;
  std::optional<ledger::Execution> execution;  // set when fault == None

  explicit operator bool() const { return fault == BlockFault::None; }
};

/// Header linkage, proposer rotation for the header's (height, round),
/// transaction signatures and nonces, and tx_root/state_root by
/// re-execution over the parent state. Commit seals are not examined.
BlockCheck validate_block(const Block& block, const ChainHead& parent, const ValidatorSet& validators);

/// True iff the block carries valid seals from at least a quorum of distinct
/// validators, all made in the same round.
bool has_commit_quorum(const Block& block, const ValidatorSet& validators);

}  // namespace aid::consensus
