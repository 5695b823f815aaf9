#pragma once

#include <deque>
#include <optional>
#include <string_view>

#include "aid/ledger/transaction.hpp"

namespace aid::node {

enum class AdmitError { BadSignature, BadNonce, Malformed, StrictModeNoAccount, MempoolFull };

std::string_view to_string(AdmitError e);

/// Longest bank-account identifier accepted for admission.
inline constexpr std::size_t kMaxAccountBytes = 1024;

/// FIFO pool of admitted, not yet finalized transactions.
class Mempool {
 public:
  explicit Mempool(bool strict_bank_account_mode = false, std::size_t capacity = 100'000)
      : strict_(strict_bank_account_mode), capacity_(capacity) {}

  /// Checks against the finalized head plus what is already pending for
  /// the same sender.
  std::optional<AdmitError> admit(const ledger::Transaction& tx, const ledger::LedgerState& head);

  /// Next expected nonce for `sender` counting pending transactions.
  std::uint64_t next_nonce(const Address& sender, const ledger::LedgerState& head) const;

  /// Transactions in admission order whose nonces continue `parent`.
  std::vector<ledger::Transaction> take(const ledger::LedgerState& parent, std::size_t max) const;

  /// Drops transactions made stale by a new head.
  void prune(const ledger::LedgerState& head);

  bool contains(const Hash32& tx_hash) const;
  std::size_t size() const { return pool_.size(); }
  bool empty() const { return pool_.empty(); }
  const std::deque<ledger::Transaction>& pending() const { return pool_; }
  bool strict() const { return strict_; }

 private:
  bool strict_;
  std::size_t capacity_;
  std::deque<ledger::Transaction> pool_;
};

}  // namespace aid::node
