#include "aid/netsim/consensus_node.hpp"

#include <algorithm>

namespace aid::netsim {

using namespace consensus;

std::string classify_net(const Bytes& payload) { return net_message_type(payload); }

ConsensusNode::ConsensusNode(ValidatorSet validators, std::optional<crypto::KeyPair> key, ChainHead head,
                             EngineConfig cfg)
    : engine_(std::move(validators), std::move(key), std::move(head), cfg,
              [this](const ledger::LedgerState& parent, std::size_t max) { return take(parent, max); }) {}

std::vector<ledger::Transaction> ConsensusNode::take(const ledger::LedgerState& parent, std::size_t max) const {
  std::vector<ledger::Transaction> out;
  std::map<Address, std::uint64_t> next;
  for (const auto& tx : pool_) {
    if (out.size() >= max) break;
    auto it = next.find(tx.sender);
    if (it == next.end()) it = next.emplace(tx.sender, parent.next_nonce(tx.sender)).first;
    if (tx.nonce != it->second) continue;
    out.push_back(tx);
    ++it->second;
  }
  return out;
}

void ConsensusNode::prune() {
  const auto& state = engine_.head().state;
  std::erase_if(pool_, [&](const ledger::Transaction& tx) { return tx.nonce < state.next_nonce(tx.sender); });
}

void ConsensusNode::preload(const ledger::Transaction& tx) { pool_.push_back(tx); }

void ConsensusNode::submit(Context& ctx, const ledger::Transaction& tx) {
  if (std::find(pool_.begin(), pool_.end(), tx) != pool_.end()) return;
  pool_.push_back(tx);
  ctx.broadcast(encode_net(TxGossip{tx}));
  dispatch(ctx, engine_.on_pending_transactions(ctx.now()), std::nullopt);
}

void ConsensusNode::on_start(Context& ctx) { dispatch(ctx, engine_.start(ctx.now()), std::nullopt); }

void ConsensusNode::on_message(Context& ctx, NodeId from, const Bytes& payload) {
  NetMessage msg;
  try {
    msg = decode_net(payload);
  } catch (const std::exception&) {
    ++decode_failures_;
    return;
  }
  if (auto* c = std::get_if<ConsensusMessage>(&msg)) {
    if (equivocating_) {
      if (const auto* p = std::get_if<Proposal>(c))
        vote_everything(ctx, p->height, p->round, p->block.hash());
    }
    dispatch(ctx, engine_.on_message(*c, ctx.now()), from);
  } else if (auto* t = std::get_if<TxGossip>(&msg)) {
    if (t->tx.nonce < engine_.head().state.next_nonce(t->tx.sender)) return;
    if (std::find(pool_.begin(), pool_.end(), t->tx) != pool_.end()) return;
    if (!t->tx.verify()) return;
    pool_.push_back(std::move(t->tx));
    dispatch(ctx, engine_.on_pending_transactions(ctx.now()), std::nullopt);
  } else {
    dispatch(ctx, engine_.on_synced_block(std::get<BlockSync>(msg).block, ctx.now()), std::nullopt);
  }
}

void ConsensusNode::on_timer(Context& ctx, std::uint64_t timer_id) {
  auto it = timers_.find(timer_id);
  if (it == timers_.end()) return;
  auto timer = it->second;
  timers_.erase(it);
  dispatch(ctx, engine_.on_timer(timer, ctx.now()), std::nullopt);
}

void ConsensusNode::dispatch(Context& ctx, EngineOutput out, std::optional<NodeId> from) {
  for (const auto& f : out.finalized) chain_.push_back(f.block);
  if (!out.finalized.empty()) {
    prune();
    // Timers of finished heights can never fire usefully.
    std::erase_if(timers_, [&](const auto& kv) { return kv.second.height < engine_.height(); });
  }
  for (const auto& t : out.timers) {
    timers_.emplace(next_timer_, t);
    ctx.set_timer(t.delay_ms, next_timer_++);
  }
  for (const auto& m : out.broadcast) {
    if (equivocating_) {
      if (const auto* p = std::get_if<Proposal>(&m); p && p->signer == engine_.key()->address()) {
        equivocate(ctx, *p);
        continue;
      }
    }
    ctx.broadcast(encode_net(m));
  }
  if (from) {
    for (auto h : out.behind_heights) {
      if (h == 0 || h > chain_.size()) continue;
      // Resend at most once a second per (peer, height).
      auto [it, fresh] = synced_.try_emplace({*from, h}, ctx.now());
      if (!fresh) {
        if (ctx.now() < it->second + 1000) continue;
        it->second = ctx.now();
      }
      ctx.send(*from, encode_net(BlockSync{chain_[h - 1]}));
    }
  }
}

void ConsensusNode::equivocate(Context& ctx, const Proposal& p) {
  const auto& key = *engine_.key();
  Block alt = p.block;
  alt.commit_seals.clear();
  alt.header.timestamp += 1;
  auto q = make_proposal(key, p.height, p.round, alt);

  std::vector<NodeId> peers;
  for (NodeId n = 0; n < ctx.node_count(); ++n)
    if (n != ctx.self()) peers.push_back(n);
  const auto a = encode_net(p);
  const auto b = encode_net(q);
  for (std::size_t i = 0; i < peers.size(); ++i) ctx.send(peers[i], i < peers.size() / 2 ? a : b);
  ++equivocations_sent_;
  vote_everything(ctx, p.height, p.round, p.block.hash());
  vote_everything(ctx, q.height, q.round, alt.hash());
}

void ConsensusNode::vote_everything(Context& ctx, std::uint64_t height, std::uint64_t round, const Hash32& hash) {
  const auto& key = engine_.key();
  if (!key) return;
  ctx.broadcast(encode_net(make_prepare(*key, height, round, hash)));
  ctx.broadcast(encode_net(make_commit(*key, height, round, hash)));
}

}  // namespace aid::netsim
