#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "aid/consensus/messages.hpp"
#include "aid/consensus/validation.hpp"

namespace aid::consensus {

struct EngineConfig {
  std::uint64_t base_timeout_ms = 500;
  std::uint64_t max_timeout_ms = 30'000;
  std::uint64_t heartbeat_ms = 1'000;
  bool empty_blocks = false;
  std::size_t max_block_txs = 1'000;
  std::size_t max_buffered = 4'096;
};

/// Round timeout: base doubled per round, capped.
std::uint64_t round_timeout(const EngineConfig& cfg, std::uint64_t round);

struct Timer {
  enum class Kind { Round, Heartbeat };
  Kind kind = Kind::Round;
  std::uint64_t height = 0;
  std::uint64_t round = 0;
  std::uint64_t delay_ms = 0;
  std::uint64_t seq = 0;
};

struct Finalized {
  Block block;
  ledger::Execution execution;
};

struct EngineOutput {
  std::vector<ConsensusMessage> broadcast;
  std::vector<Timer> timers;
  std::vector<Finalized> finalized;
  /// A peer spoke about an already-finalized height; the host may answer
  /// with that block.
  std::vector<std::uint64_t> behind_heights;

  void append(EngineOutput&& other);
};

struct EngineMetrics {
  std::uint64_t dropped_invalid = 0;
  std::uint64_t dropped_past = 0;
  std::uint64_t dropped_overflow = 0;
  std::uint64_t buffered_future = 0;
  std::uint64_t equivocations_seen = 0;
  std::uint64_t rounds_entered = 0;
  std::uint64_t heights_finalized = 0;
};

struct NotProposer : std::logic_error {
  NotProposer() : std::logic_error("local node is not the proposer for this height and round") {}
};

/// Supplies pending transactions whose nonces continue `parent`, in
/// admission order, at most `max` of them.
using TxSource = std::function<std::vector<ledger::Transaction>(const ledger::LedgerState& parent, std::size_t max)>;

/// Three-phase BFT engine (proposal, prepare, commit) with round-robin
/// proposers and round changes on timeout.
///
/// Locking: a validator locks on the block with the highest-round prepare
/// quorum it has seen and afterwards prepares only that block; a locked
/// proposer re-proposes it unchanged. Finalization needs a commit quorum
/// from a single round.
///
/// The engine performs no I/O. Every input returns the messages to
/// broadcast, timers to arm and blocks finalized as a consequence.
class Engine {
 public:
  /// `key` is empty for observers, which follow the chain but never vote.
  Engine(ValidatorSet validators, std::optional<crypto::KeyPair> key, ChainHead head, EngineConfig cfg,
         TxSource tx_source);

  EngineOutput start(std::uint64_t now_ms);
  EngineOutput on_message(const ConsensusMessage& msg, std::uint64_t now_ms);
  EngineOutput on_timer(const Timer& timer, std::uint64_t now_ms);
  EngineOutput on_pending_transactions(std::uint64_t now_ms);
  /// Accepts a finalized block carrying a commit quorum, e.g. from a peer
  /// answering for a height this node missed.
  EngineOutput on_synced_block(const Block& block, std::uint64_t now_ms);

  /// Builds, signs and broadcasts a proposal for the current height and
  /// round. Throws NotProposer.
  EngineOutput propose(std::uint64_t now_ms);

  /// Unsigned candidate block on the current head.
  Block build_block(std::uint64_t round, std::uint64_t now_ms, std::vector<ledger::Transaction> txs) const;

  std::uint64_t height() const { return height_; }
  std::uint64_t round() const { return round_; }
  const ChainHead& head() const { return head_; }
  const ValidatorSet& validators() const { return validators_; }
  const EngineMetrics& metrics() const { return metrics_; }
  const std::optional<crypto::KeyPair>& key() const { return key_; }
  bool is_validator() const { return self_index_.has_value(); }
  bool is_proposer() const;
  std::optional<std::pair<std::uint64_t, Hash32>> lock() const { return lock_; }

 private:
  struct Candidate {
    Block block;
    ledger::Execution execution;
  };

  void handle(const ConsensusMessage& msg, std::uint64_t now, EngineOutput& out);
  void handle_proposal(const Proposal& p, std::uint64_t now, EngineOutput& out);
  void accept_proposal(const Proposal& p, std::uint64_t now, EngineOutput& out);
  void record_prepare(std::uint64_t round, const Hash32& hash, const Address& signer);
  void record_commit(const Commit& c);
  void record_round_change(std::uint64_t round, const Address& signer, std::uint64_t now, EngineOutput& out);
  void progress(std::uint64_t now, EngineOutput& out);
  void try_propose(std::uint64_t now, EngineOutput& out);
  void do_propose(std::uint64_t now, EngineOutput& out);
  void activate(EngineOutput& out);
  void arm_round_timer(EngineOutput& out);
  void enter_round(std::uint64_t round, std::uint64_t now, EngineOutput& out);
  void finalize(const Hash32& hash, std::vector<CommitSeal> seals, std::uint64_t now, EngineOutput& out);
  void enter_height(std::uint64_t now, EngineOutput& out);
  bool has_pending() const;

  ValidatorSet validators_;
  std::optional<crypto::KeyPair> key_;
  std::optional<std::size_t> self_index_;
  ChainHead head_;
  EngineConfig cfg_;
  TxSource tx_source_;
  EngineMetrics metrics_;

  std::uint64_t height_ = 1;
  std::uint64_t round_ = 0;
  bool active_ = false;
  bool proposed_ = false;
  bool heartbeat_fired_ = false;
  std::uint64_t timer_seq_ = 0;

  std::map<Hash32, Candidate> candidates_;
  std::map<std::uint64_t, Hash32> accepted_;
  std::map<std::uint64_t, Proposal> pending_proposals_;
  std::map<std::uint64_t, std::map<Hash32, std::set<Address>>> prepares_;
  std::map<std::uint64_t, std::map<Hash32, std::map<Address, CommitSeal>>> commits_;
  std::map<std::uint64_t, std::set<Address>> round_changes_;
  std::set<std::uint64_t> committed_rounds_;
  std::optional<std::pair<std::uint64_t, Hash32>> lock_;
  std::vector<ConsensusMessage> future_;
};

}  // namespace aid::consensus
