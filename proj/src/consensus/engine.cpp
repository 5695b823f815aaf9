#include "aid/consensus/engine.hpp"

#include <algorithm>

namespace aid::consensus {

std::uint64_t round_timeout(const EngineConfig& cfg, std::uint64_t round) {
  std::uint64_t t = cfg.base_timeout_ms;
  for (std::uint64_t i = 0; i < round && t < cfg.max_timeout_ms; ++i) t *= 2;
  return std::min(t, cfg.max_timeout_ms);
}

void EngineOutput::append(EngineOutput&& other) {
  for (auto& m : other.broadcast) broadcast.push_back(std::move(m));
  for (auto& t : other.timers) timers.push_back(t);
  for (auto& f : other.finalized) finalized.push_back(std::move(f));
  for (auto h : other.behind_heights) behind_heights.push_back(h);
}

Engine::Engine(ValidatorSet validators, std::optional<crypto::KeyPair> key, ChainHead head, EngineConfig cfg,
               TxSource tx_source)
    : validators_(std::move(validators)),
      key_(std::move(key)),
      head_(std::move(head)),
      cfg_(cfg),
      tx_source_(std::move(tx_source)) {
  if (key_) self_index_ = validators_.index_of(key_->address());
  height_ = head_.height + 1;
}

bool Engine::is_proposer() const {
  return self_index_ && validators_.proposer_for(height_, round_) == validators_.at(*self_index_);
}

bool Engine::has_pending() const { return tx_source_ && !tx_source_(head_.state, 1).empty(); }

EngineOutput Engine::start(std::uint64_t now_ms) {
  EngineOutput out;
  enter_height(now_ms, out);
  return out;
}

EngineOutput Engine::on_message(const ConsensusMessage& msg, std::uint64_t now_ms) {
  EngineOutput out;
  handle(msg, now_ms, out);
  return out;
}

EngineOutput Engine::on_pending_transactions(std::uint64_t now_ms) {
  EngineOutput out;
  if (!has_pending()) return out;
  activate(out);
  try_propose(now_ms, out);
  return out;
}

EngineOutput Engine::on_timer(const Timer& timer, std::uint64_t now_ms) {
  EngineOutput out;
  if (timer.height != height_) return out;
  if (timer.kind == Timer::Kind::Heartbeat) {
    heartbeat_fired_ = true;
    activate(out);
    try_propose(now_ms, out);
    return out;
  }
  if (timer.round != round_ || timer.seq != timer_seq_) return out;
  enter_round(round_ + 1, now_ms, out);
  return out;
}

EngineOutput Engine::on_synced_block(const Block& block, std::uint64_t now_ms) {
  EngineOutput out;
  if (block.header.height != height_) return out;
  if (!has_commit_quorum(block, validators_)) {
    ++metrics_.dropped_invalid;
    return out;
  }
  auto hash = block.hash();
  if (!candidates_.count(hash)) {
    auto check = validate_block(block, head_, validators_);
    if (!check) {
      ++metrics_.dropped_invalid;
      return out;
    }
    Block bare = block;
    bare.commit_seals.clear();
    candidates_.emplace(hash, Candidate{std::move(bare), std::move(*check.execution)});
  }
  finalize(hash, block.commit_seals, now_ms, out);
  return out;
}

EngineOutput Engine::propose(std::uint64_t now_ms) {
  if (!is_proposer()) throw NotProposer();
  EngineOutput out;
  activate(out);
  do_propose(now_ms, out);
  return out;
}

Block Engine::build_block(std::uint64_t round, std::uint64_t now_ms, std::vector<ledger::Transaction> txs) const {
  auto exec = ledger::execute(head_.state, txs);
  if (!exec) {
    txs.clear();
    exec = ledger::execute(head_.state, txs);
  }
  Block b;
  b.header.height = height_;
  b.header.parent_hash = head_.hash;
  b.header.proposer = validators_.proposer_for(height_, round);
  b.header.round = round;
  b.header.timestamp = std::max(head_.timestamp, now_ms / 1000);
  b.header.tx_root = tx_root(txs);
  b.header.state_root = ledger::state_root(exec->state.aid);
  b.transactions = std::move(txs);
  return b;
}

void Engine::handle(const ConsensusMessage& msg, std::uint64_t now, EngineOutput& out) {
  const auto h = message_height(msg);
  if (!validators_.contains(message_signer(msg))) {
    ++metrics_.dropped_invalid;
    return;
  }
  if (h < height_) {
    ++metrics_.dropped_past;
    out.behind_heights.push_back(h);
    return;
  }
  if (h > height_) {
    if (future_.size() >= cfg_.max_buffered) {
      ++metrics_.dropped_overflow;
      return;
    }
    ++metrics_.buffered_future;
    future_.push_back(msg);
    return;
  }
  if (!verify_message(msg)) {
    ++metrics_.dropped_invalid;
    return;
  }

  if (auto* p = std::get_if<Proposal>(&msg)) {
    handle_proposal(*p, now, out);
  } else if (auto* pr = std::get_if<Prepare>(&msg)) {
    activate(out);
    record_prepare(pr->round, pr->block_hash, pr->signer);
    progress(now, out);
  } else if (auto* c = std::get_if<Commit>(&msg)) {
    activate(out);
    record_commit(*c);
    progress(now, out);
  } else if (auto* rc = std::get_if<RoundChange>(&msg)) {
    activate(out);
    record_round_change(rc->new_round, rc->signer, now, out);
    progress(now, out);
  }
}

void Engine::handle_proposal(const Proposal& p, std::uint64_t now, EngineOutput& out) {
  if (p.signer != validators_.proposer_for(height_, p.round) || p.block.header.round > p.round) {
    ++metrics_.dropped_invalid;
    return;
  }
  if (p.round < round_) {
    // Keep the body of a block we are locked on, so it can be re-proposed.
    auto hash = p.block.hash();
    if (lock_ && lock_->second == hash && !candidates_.count(hash)) {
      if (auto check = validate_block(p.block, head_, validators_))
        candidates_.emplace(hash, Candidate{p.block, std::move(*check.execution)});
    }
    return;
  }
  if (p.round > round_) {
    activate(out);
    pending_proposals_.try_emplace(p.round, p);
    return;
  }
  accept_proposal(p, now, out);
}

void Engine::accept_proposal(const Proposal& p, std::uint64_t now, EngineOutput& out) {
  const auto hash = p.block.hash();
  if (auto it = accepted_.find(round_); it != accepted_.end()) {
    if (it->second != hash) ++metrics_.equivocations_seen;
    return;
  }
  activate(out);
  if (!candidates_.count(hash)) {
    auto check = validate_block(p.block, head_, validators_);
    if (!check) {
      ++metrics_.dropped_invalid;
      return;
    }
    Block bare = p.block;
    bare.commit_seals.clear();
    candidates_.emplace(hash, Candidate{std::move(bare), std::move(*check.execution)});
  }
  if (lock_ && lock_->second != hash) return;

  accepted_[round_] = hash;
  if (is_validator()) {
    out.broadcast.push_back(make_prepare(*key_, height_, round_, hash));
    record_prepare(round_, hash, key_->address());
  }
  progress(now, out);
}

void Engine::record_prepare(std::uint64_t round, const Hash32& hash, const Address& signer) {
  prepares_[round][hash].insert(signer);
}

void Engine::record_commit(const Commit& c) {
  commits_[c.round][c.block_hash].try_emplace(c.signer, CommitSeal{c.signer, c.round, c.signature});
}

void Engine::record_round_change(std::uint64_t round, const Address& signer, std::uint64_t now, EngineOutput& out) {
  round_changes_[round].insert(signer);
  if (round > round_ && round_changes_[round].size() >= validators_.max_faulty() + 1) {
    enter_round(round, now, out);
    return;
  }
  try_propose(now, out);
}

void Engine::progress(std::uint64_t now, EngineOutput& out) {
  const std::size_t quorum = validators_.quorum();

  for (const auto& [round, by_hash] : prepares_)
    for (const auto& [hash, signers] : by_hash)
      if (signers.size() >= quorum && (!lock_ || round > lock_->first)) lock_ = {round, hash};

  if (is_validator() && !committed_rounds_.count(round_)) {
    auto it = accepted_.find(round_);
    if (it != accepted_.end() && lock_ && lock_->first == round_ && lock_->second == it->second) {
      committed_rounds_.insert(round_);
      auto c = make_commit(*key_, height_, round_, it->second);
      out.broadcast.push_back(c);
      record_commit(c);
    }
  }

  for (const auto& [round, by_hash] : commits_) {
    for (const auto& [hash, seals] : by_hash) {
      if (seals.size() < quorum || !candidates_.count(hash)) continue;
      std::vector<CommitSeal> ordered;
      for (const auto& [signer, seal] : seals) ordered.push_back(seal);
      std::sort(ordered.begin(), ordered.end(), [this](const CommitSeal& a, const CommitSeal& b) {
        return *validators_.index_of(a.validator) < *validators_.index_of(b.validator);
      });
      const Hash32 decided = hash;
      finalize(decided, std::move(ordered), now, out);
      return;
    }
  }
}

void Engine::try_propose(std::uint64_t now, EngineOutput& out) {
  if (!is_proposer() || proposed_) return;
  if (round_ == 0) {
    if (!heartbeat_fired_ && !has_pending()) return;
  } else if (round_changes_[round_].size() < validators_.quorum()) {
    return;
  }
  do_propose(now, out);
}

void Engine::do_propose(std::uint64_t now, EngineOutput& out) {
  proposed_ = true;
  Block block;
  if (lock_) {
    auto it = candidates_.find(lock_->second);
    if (it == candidates_.end()) return;
    block = it->second.block;
  } else {
    std::vector<ledger::Transaction> txs;
    if (tx_source_) txs = tx_source_(head_.state, cfg_.max_block_txs);
    block = build_block(round_, now, std::move(txs));
    auto exec = ledger::execute(head_.state, block.transactions);
    candidates_.emplace(block.hash(), Candidate{block, std::move(*exec)});
  }
  auto proposal = make_proposal(*key_, height_, round_, std::move(block));
  out.broadcast.push_back(proposal);
  accept_proposal(proposal, now, out);
}

void Engine::activate(EngineOutput& out) {
  if (active_) return;
  active_ = true;
  arm_round_timer(out);
}

void Engine::arm_round_timer(EngineOutput& out) {
  out.timers.push_back(Timer{Timer::Kind::Round, height_, round_, round_timeout(cfg_, round_), ++timer_seq_});
}

void Engine::enter_round(std::uint64_t round, std::uint64_t now, EngineOutput& out) {
  round_ = round;
  proposed_ = false;
  active_ = true;
  ++metrics_.rounds_entered;
  arm_round_timer(out);
  if (is_validator()) {
    out.broadcast.push_back(make_round_change(*key_, height_, round_));
    round_changes_[round_].insert(key_->address());
  }

  const auto h = height_;
  if (auto it = pending_proposals_.find(round_); it != pending_proposals_.end()) {
    auto p = std::move(it->second);
    pending_proposals_.erase(pending_proposals_.begin(), std::next(it));
    accept_proposal(p, now, out);
    if (height_ != h) return;
  }
  try_propose(now, out);
  if (height_ != h) return;
  progress(now, out);
}

void Engine::finalize(const Hash32& hash, std::vector<CommitSeal> seals, std::uint64_t now, EngineOutput& out) {
  auto node = candidates_.extract(hash);
  Candidate cand = std::move(node.mapped());
  cand.block.commit_seals = std::move(seals);

  head_.height = height_;
  head_.hash = hash;
  head_.timestamp = cand.block.header.timestamp;
  head_.state = cand.execution.state;
  out.finalized.push_back(Finalized{std::move(cand.block), std::move(cand.execution)});
  ++metrics_.heights_finalized;

  ++height_;
  enter_height(now, out);
}

void Engine::enter_height(std::uint64_t now, EngineOutput& out) {
  round_ = 0;
  active_ = false;
  proposed_ = false;
  heartbeat_fired_ = false;
  ++timer_seq_;
  candidates_.clear();
  accepted_.clear();
  pending_proposals_.clear();
  prepares_.clear();
  commits_.clear();
  round_changes_.clear();
  committed_rounds_.clear();
  lock_.reset();

  if (cfg_.empty_blocks) out.timers.push_back(Timer{Timer::Kind::Heartbeat, height_, 0, cfg_.heartbeat_ms, 0});

  const auto h = height_;
  std::vector<ConsensusMessage> replay;
  std::vector<ConsensusMessage> keep;
  for (auto& m : future_) {
    auto mh = message_height(m);
    if (mh == h)
      replay.push_back(std::move(m));
    else if (mh > h)
      keep.push_back(std::move(m));
  }
  future_ = std::move(keep);
  for (const auto& m : replay) {
    handle(m, now, out);
    if (height_ != h) return;
  }

  if (has_pending()) {
    activate(out);
    try_propose(now, out);
  }
}

}  // namespace aid::consensus
