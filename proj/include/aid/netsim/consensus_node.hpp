#pragma once

#include <map>

#include "aid/consensus/engine.hpp"
#include "aid/consensus/wire.hpp"
#include "aid/netsim/simulator.hpp"

namespace aid::netsim {

/// Runs one consensus engine inside the simulator: a FIFO transaction pool,
/// timer bookkeeping and block sync for peers that fall behind.
///
/// As an equivocator it signs two conflicting proposals whenever it leads
/// a round, sends each to half of its peers, and prepares and commits every
/// block it sees.
class ConsensusNode : public NodeProgram {
 public:
  ConsensusNode(consensus::ValidatorSet validators, std::optional<crypto::KeyPair> key, consensus::ChainHead head,
                consensus::EngineConfig cfg);

  /// Adds to the local pool only; usable before the run starts.
  void preload(const ledger::Transaction& tx);
  /// Adds to the pool and gossips to every peer.
  void submit(Context& ctx, const ledger::Transaction& tx);

  void on_start(Context& ctx) override;
  void on_message(Context& ctx, NodeId from, const Bytes& payload) override;
  void on_timer(Context& ctx, std::uint64_t timer_id) override;
  void make_equivocator() override { equivocating_ = true; }

  bool equivocating() const { return equivocating_; }
  const consensus::Engine& engine() const { return engine_; }
  /// Finalized blocks, heights 1..n.
  const std::vector<consensus::Block>& chain() const { return chain_; }
  std::uint64_t height() const { return chain_.size(); }
  std::size_t pool_size() const { return pool_.size(); }
  std::uint64_t decode_failures() const { return decode_failures_; }
  /// Conflicting proposal pairs sent while equivocating.
  std::uint64_t equivocations_sent() const { return equivocations_sent_; }

 private:
  std::vector<ledger::Transaction> take(const ledger::LedgerState& parent, std::size_t max) const;
  void dispatch(Context& ctx, consensus::EngineOutput out, std::optional<NodeId> from);
  void equivocate(Context& ctx, const consensus::Proposal& p);
  void vote_everything(Context& ctx, std::uint64_t height, std::uint64_t round, const Hash32& hash);
  void prune();

  std::vector<ledger::Transaction> pool_;
  consensus::Engine engine_;
  std::vector<consensus::Block> chain_;
  std::map<std::uint64_t, consensus::Timer> timers_;
  std::uint64_t next_timer_ = 0;
  std::map<std::pair<NodeId, std::uint64_t>, std::uint64_t> synced_;
  bool equivocating_ = false;
  std::uint64_t decode_failures_ = 0;
  std::uint64_t equivocations_sent_ = 0;
};

/// Trace classifier for encoded NetMessages.
std::string classify_net(const Bytes& payload);

}  // namespace aid::netsim
