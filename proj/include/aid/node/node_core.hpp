#pragma once

#include <map>
#include <memory>
#include <string>

#include "aid/consensus/wire.hpp"
#include "aid/node/bank_sink.hpp"
#include "aid/node/chain_store.hpp"
#include "aid/node/mempool.hpp"

namespace aid::node {

/// Immutable picture of a node at one head, handed to readers.
struct View {
  std::string chain_id;
  bool strict_bank_account_mode = false;
  consensus::ChainHead head;
  std::shared_ptr<const std::vector<std::shared_ptr<const BlockRecord>>> blocks;  // index = height
  std::vector<ledger::Transaction> mempool;
  std::uint64_t round = 0;

  /// Pending-aware next nonce for a sender.
  std::uint64_t next_nonce(const Address& sender) const;
};

/// Effects the host must carry out after an input.
struct Outbox {
  std::vector<Bytes> broadcast;
  std::vector<std::pair<std::string, Bytes>> direct;  // (peer, payload)
  std::vector<std::pair<std::uint64_t, std::uint64_t>> timers;  // (timer id, delay ms)
  std::vector<std::shared_ptr<const BlockRecord>> committed;
};

struct SubmitResult {
  Hash32 tx_hash;
  std::optional<AdmitError> error;
};

/// Consensus engine, mempool, chain store and bank sink wired together,
/// without threads or sockets. Not thread-safe; the host serializes calls.
class NodeCore {
 public:
  /// `key` empty: observer. `sink` may be null.
  NodeCore(ChainStore& store, std::optional<crypto::KeyPair> key, consensus::EngineConfig cfg, bool strict,
           BankSink* sink);

  /// Re-emits bank instructions for the whole chain (the sink drops those
  /// already delivered), then starts the engine.
  Outbox start(std::uint64_t now_ms);
  Outbox submit(const ledger::Transaction& tx, std::uint64_t now_ms, SubmitResult& result);
  Outbox on_network(const std::string& peer, ByteView payload, std::uint64_t now_ms);
  Outbox on_timer(std::uint64_t timer_id, std::uint64_t now_ms);

  std::shared_ptr<const View> view() const { return view_; }
  const consensus::Engine& engine() const { return engine_; }
  const Mempool& mempool() const { return mempool_; }
  const ChainStore& store() const { return store_; }
  std::uint64_t rejected_messages() const { return rejected_; }

 private:
  void dispatch(consensus::EngineOutput out, const std::string* peer, std::uint64_t now, Outbox& box);
  void refresh_view();

  ChainStore& store_;
  Mempool mempool_;
  consensus::Engine engine_;
  BankSink* sink_;
  std::map<std::uint64_t, consensus::Timer> timers_;
  std::uint64_t next_timer_ = 1;
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> synced_;
  std::shared_ptr<const std::vector<std::shared_ptr<const BlockRecord>>> blocks_;
  std::shared_ptr<const View> view_;
  std::uint64_t rejected_ = 0;
};

/// One instruction per AllowanceSent in the block, in block order.
std::vector<BankInstruction> instructions_for(const BlockRecord& r, const ledger::AidState& state_after);

}  // namespace aid::node
