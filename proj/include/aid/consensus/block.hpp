#pragma once

#include <cstdint>
#include <vector>

#include "aid/ledger/transaction.hpp"

namespace aid::consensus {

struct BlockHeader {
  std::uint64_t height = 0;
  Hash32 parent_hash;
  Hash32 tx_root;
  Hash32 state_root;
  Address proposer;
  std::uint64_t round = 0;
  std::uint64_t timestamp = 0;  // seconds

  Bytes encode() const;
  static BlockHeader decode(Reader& r);
  Hash32 hash() const;

  friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

/// A validator's commit signature for a block, made in the given round.
struct CommitSeal {
  Address validator;
  std::uint64_t round = 0;
  crypto::Signature signature;

  friend bool operator==(const CommitSeal&, const CommitSeal&) = default;
};

struct Block {
  BlockHeader header;
  std::vector<ledger::Transaction> transactions;
  std::vector<CommitSeal> commit_seals;

  Hash32 hash() const { return header.hash(); }
  Bytes encode() const;
  static Block decode(ByteView bytes);

  friend bool operator==(const Block&, const Block&) = default;
};

/// keccak256 over the concatenated transaction hashes.
Hash32 tx_root(const std::vector<ledger::Transaction>& txs);

/// Height-0 block for a chain whose contract is owned by `organization`.
Block genesis_block(const Address& organization, std::uint64_t timestamp);

}  // namespace aid::consensus
