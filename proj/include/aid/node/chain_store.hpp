#pragma once

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>

#include "aid/node/genesis.hpp"

namespace aid::node {

struct StorageError : std::runtime_error {
  enum class Kind { Io, ChecksumMismatch, GapInChain, HashMismatch, ValidationFailure };
  StorageError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

std::string_view to_string(StorageError::Kind k);

/// One finalized block with what executing it produced.
struct BlockRecord {
  consensus::Block block;
  Hash32 hash;
  std::vector<Hash32> tx_hashes;
  std::vector<ledger::Receipt> receipts;
};

/// Re-executes `blocks` (heights 1..n, contiguous) from genesis. Checks
/// linkage, seals and state roots. Throws StorageError.
ledger::LedgerState replay(const GenesisDoc& genesis, const std::vector<consensus::Block>& blocks);

/// Append-only block log plus the materialized head.
///
/// File layout, <dir>/blocks.log: frames of u32 length | block bytes |
/// u32 crc32(block bytes), big-endian. A short trailing frame (write cut
/// off by a crash) is truncated on open; a complete frame with a bad
/// checksum is an error.
class ChainStore {
 public:
  ChainStore(std::string dir, GenesisDoc genesis);
  ~ChainStore();
  ChainStore(const ChainStore&) = delete;
  ChainStore& operator=(const ChainStore&) = delete;

  /// Persists a finalized block (fsync before return) and advances the
  /// head. `exec` must be the block's execution over the current head.
  std::shared_ptr<const BlockRecord> commit(const consensus::Block& block, const ledger::Execution& exec);

  const GenesisDoc& genesis() const { return genesis_; }
  const consensus::ChainHead& head() const { return head_; }
  /// Index = height; entry 0 is the genesis block.
  const std::vector<std::shared_ptr<const BlockRecord>>& blocks() const { return blocks_; }
  std::uint64_t truncated_bytes() const { return truncated_; }
  std::string log_path() const;

  /// Human-readable dump of every block, transaction and receipt.
  void export_text(std::ostream& os) const;

 private:
  void load();
  std::shared_ptr<const BlockRecord> record(const consensus::Block& block, const ledger::Execution& exec);

  std::string dir_;
  GenesisDoc genesis_;
  consensus::ValidatorSet validators_;
  consensus::ChainHead head_;
  std::vector<std::shared_ptr<const BlockRecord>> blocks_;
  int fd_ = -1;
  std::uint64_t truncated_ = 0;
};

}  // namespace aid::node
