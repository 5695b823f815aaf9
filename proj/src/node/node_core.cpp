#include "aid/node/node_core.hpp"

namespace aid::node {

using namespace consensus;

std::uint64_t View::next_nonce(const Address& sender) const {
  std::uint64_t n = head.state.next_nonce(sender);
  for (const auto& tx : mempool)
    if (tx.sender == sender && tx.nonce == n) ++n;
  return n;
}

std::vector<BankInstruction> instructions_for(const BlockRecord& r, const ledger::AidState& state_after) {
  // The account hash in force when the block finalized. A later block in
  // the same chain could change it, so callers pass the post-block state.
  std::vector<BankInstruction> out;
  for (std::size_t i = 0; i < r.receipts.size(); ++i) {
    const auto& events = r.receipts[i].events;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto* sent = std::get_if<ledger::AllowanceSent>(&events[e]);
      if (!sent) continue;
      BankInstruction b;
      b.block_height = r.block.header.height;
      b.tx_hash = r.tx_hashes[i];
      b.event_index = static_cast<std::uint32_t>(e);
      b.recipient = sent->recipient;
      b.amount = sent->amount;
      b.account_hash = ledger::bank_account(state_after, sent->recipient);
      out.push_back(b);
    }
  }
  return out;
}

NodeCore::NodeCore(ChainStore& store, std::optional<crypto::KeyPair> key, EngineConfig cfg, bool strict,
                   BankSink* sink)
    : store_(store),
      mempool_(strict),
      engine_(store.genesis().validator_set(), std::move(key), store.head(), cfg,
              [this](const ledger::LedgerState& parent, std::size_t max) { return mempool_.take(parent, max); }),
      sink_(sink) {
  blocks_ = std::make_shared<const std::vector<std::shared_ptr<const BlockRecord>>>(store_.blocks());
  refresh_view();
}

Outbox NodeCore::start(std::uint64_t now_ms) {
  if (sink_) {
    // Catch-up walks the chain once, keeping state after each block.
    auto head = store_.genesis().head();
    for (std::size_t h = 1; h < store_.blocks().size(); ++h) {
      const auto& r = *store_.blocks()[h];
      auto exec = ledger::execute(head.state, r.block.transactions);
      head.state = exec->state;
      for (auto& b : instructions_for(r, head.state.aid)) sink_->emit(std::move(b));
    }
  }
  Outbox box;
  dispatch(engine_.start(now_ms), nullptr, now_ms, box);
  return box;
}

Outbox NodeCore::submit(const ledger::Transaction& tx, std::uint64_t now_ms, SubmitResult& result) {
  Outbox box;
  result.tx_hash = tx.hash();
  result.error = mempool_.admit(tx, store_.head().state);
  if (result.error) return box;
  box.broadcast.push_back(encode_net(TxGossip{tx}));
  dispatch(engine_.on_pending_transactions(now_ms), nullptr, now_ms, box);
  refresh_view();
  return box;
}

Outbox NodeCore::on_network(const std::string& peer, ByteView payload, std::uint64_t now_ms) {
  Outbox box;
  NetMessage msg;
  try {
    msg = decode_net(payload);
  } catch (const std::exception&) {
    ++rejected_;
    return box;
  }
  if (auto* c = std::get_if<ConsensusMessage>(&msg)) {
    dispatch(engine_.on_message(*c, now_ms), &peer, now_ms, box);
  } else if (auto* t = std::get_if<TxGossip>(&msg)) {
    // Gossip is not re-broadcast; every node gossips only what its own
    // clients submitted, and the network is fully connected.
    if (mempool_.admit(t->tx, store_.head().state)) {
      ++rejected_;
      return box;
    }
    dispatch(engine_.on_pending_transactions(now_ms), nullptr, now_ms, box);
    refresh_view();
  } else {
    dispatch(engine_.on_synced_block(std::get<BlockSync>(msg).block, now_ms), nullptr, now_ms, box);
  }
  return box;
}

Outbox NodeCore::on_timer(std::uint64_t timer_id, std::uint64_t now_ms) {
  Outbox box;
  auto it = timers_.find(timer_id);
  if (it == timers_.end()) return box;
  auto t = it->second;
  timers_.erase(it);
  dispatch(engine_.on_timer(t, now_ms), nullptr, now_ms, box);
  return box;
}

void NodeCore::dispatch(EngineOutput out, const std::string* peer, std::uint64_t now, Outbox& box) {
  if (!out.finalized.empty()) {
    auto blocks = std::make_shared<std::vector<std::shared_ptr<const BlockRecord>>>(*blocks_);
    for (const auto& f : out.finalized) {
      auto rec = store_.commit(f.block, f.execution);  // StorageError propagates: fail-stop
      blocks->push_back(rec);
      box.committed.push_back(rec);
      mempool_.prune(store_.head().state);
      if (sink_)
        for (auto& b : instructions_for(*rec, f.execution.state.aid)) sink_->emit(std::move(b));
    }
    blocks_ = std::move(blocks);
    std::erase_if(timers_, [&](const auto& kv) { return kv.second.height < engine_.height(); });
  }
  for (const auto& t : out.timers) {
    timers_.emplace(next_timer_, t);
    box.timers.emplace_back(next_timer_++, t.delay_ms);
  }
  for (const auto& m : out.broadcast) box.broadcast.push_back(encode_net(m));
  if (peer) {
    for (auto h : out.behind_heights) {
      if (h == 0 || h >= store_.blocks().size()) continue;
      auto [it, fresh] = synced_.try_emplace({*peer, h}, now);
      if (!fresh) {
        if (now < it->second + 1000) continue;
        it->second = now;
      }
      box.direct.emplace_back(*peer, encode_net(BlockSync{store_.blocks()[h]->block}));
    }
  }
  if (!out.finalized.empty() || view_->round != engine_.round()) refresh_view();
  if (synced_.size() > 10'000) synced_.clear();
}

void NodeCore::refresh_view() {
  auto v = std::make_shared<View>();
  v->chain_id = store_.genesis().chain_id;
  v->strict_bank_account_mode = mempool_.strict();
  v->head = store_.head();
  v->blocks = blocks_;
  v->mempool.assign(mempool_.pending().begin(), mempool_.pending().end());
  v->round = engine_.round();
  view_ = std::move(v);
}

}  // namespace aid::node
