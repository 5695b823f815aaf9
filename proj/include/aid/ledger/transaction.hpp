#pragma once

#include <cstdint>
#include <map>

#include "aid/crypto/identity.hpp"
#include "aid/ledger/state.hpp"

namespace aid::ledger {

/// Signed envelope around one payload. Canonical bytes:
///   sender(20) | nonce(u64) | u32-length-prefixed payload | public_key(64) | r(32) | s(32)
/// The signature covers everything before r.
struct Transaction {
  Address sender;
  std::uint64_t nonce = 0;
  TxPayload payload;
  crypto::Signature signature;

  static Transaction make(const crypto::KeyPair& key, std::uint64_t nonce, TxPayload payload);

  const crypto::PublicKey& public_key() const { return signature.public_key; }

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Transaction decode(ByteView bytes);
  Hash32 hash() const;

  /// Signature valid for the carried key and the key derives to sender.
  bool verify() const;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// AidState plus the per-sender nonce counters used for replay protection.
/// Nonces live beside the contract state, not inside its serialization.
struct LedgerState {
  AidState aid;
  std::map<Address, std::uint64_t> nonces;

  std::uint64_t next_nonce(const Address& sender) const {
    auto it = nonces.find(sender);
    return it == nonces.end() ? 0 : it->second;
  }

  friend bool operator==(const LedgerState&, const LedgerState&) = default;
};

struct Execution {
  LedgerState state;
  std::vector<Receipt> receipts;
};

/// Applies transactions in order. Every transaction must carry the sender's
/// next nonce (failed payloads still consume it); returns nullopt on a nonce
/// gap. Signatures are not checked here.
std::optional<Execution> execute(const LedgerState& parent, const std::vector<Transaction>& txs);

}  // namespace aid::ledger
