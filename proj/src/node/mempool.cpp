#include "aid/node/mempool.hpp"

#include <algorithm>
#include <map>

namespace aid::node {

std::string_view to_string(AdmitError e) {
  switch (e) {
    case AdmitError::BadSignature: return "BadSignature";
    case AdmitError::BadNonce: return "BadNonce";
    case AdmitError::Malformed: return "Malformed";
    case AdmitError::StrictModeNoAccount: return "StrictModeNoAccount";
    case AdmitError::MempoolFull: return "MempoolFull";
  }
  return "?";
}

std::uint64_t Mempool::next_nonce(const Address& sender, const ledger::LedgerState& head) const {
  std::uint64_t n = head.next_nonce(sender);
  for (const auto& tx : pool_)
    if (tx.sender == sender && tx.nonce == n) ++n;
  return n;
}

std::optional<AdmitError> Mempool::admit(const ledger::Transaction& tx, const ledger::LedgerState& head) {
  if (const auto* reg = std::get_if<ledger::RegisterBankAccount>(&tx.payload);
      reg && reg->account.size() > kMaxAccountBytes)
    return AdmitError::Malformed;
  if (!tx.verify()) return AdmitError::BadSignature;
  if (tx.nonce != next_nonce(tx.sender, head)) return AdmitError::BadNonce;
  if (strict_) {
    if (const auto* send = std::get_if<ledger::SendAllowance>(&tx.payload);
        send && !ledger::bank_account(head.aid, send->recipient))
      return AdmitError::StrictModeNoAccount;
  }
  if (pool_.size() >= capacity_) return AdmitError::MempoolFull;
  pool_.push_back(tx);
  return std::nullopt;
}

std::vector<ledger::Transaction> Mempool::take(const ledger::LedgerState& parent, std::size_t max) const {
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

void Mempool::prune(const ledger::LedgerState& head) {
  std::erase_if(pool_, [&](const ledger::Transaction& tx) { return tx.nonce < head.next_nonce(tx.sender); });
}

bool Mempool::contains(const Hash32& tx_hash) const {
  return std::any_of(pool_.begin(), pool_.end(), [&](const auto& tx) { return tx.hash() == tx_hash; });
}

}  // namespace aid::node
