#include "aid/ledger/transaction.hpp"

#include "aid/crypto/keccak.hpp"

namespace aid::ledger {

namespace {

void write_unsigned(Writer& w, const Transaction& tx) {
  Writer body;
  encode(body, tx.payload);
  w.fixed(tx.sender).u64(tx.nonce).bytes(body.data()).fixed(tx.signature.public_key);
}

}  // namespace

Transaction Transaction::make(const crypto::KeyPair& key, std::uint64_t nonce, TxPayload payload) {
  Transaction tx{key.address(), nonce, std::move(payload), {}};
  tx.signature.public_key = key.public_key;
  tx.signature = crypto::sign(key, tx.signing_bytes());
  return tx;
}

Bytes Transaction::signing_bytes() const {
  Writer w;
  write_unsigned(w, *this);
  return std::move(w).take();
}

Bytes Transaction::encode() const {
  Writer w;
  write_unsigned(w, *this);
  w.fixed(signature.r).fixed(signature.s);
  return std::move(w).take();
}

Transaction Transaction::decode(ByteView bytes) {
  Reader r(bytes);
  Transaction tx;
  tx.sender = r.fixed<Address>();
  tx.nonce = r.u64();
  auto body = r.bytes();
  Reader pr(body);
  tx.payload = decode_payload(pr);
  pr.finish();
  tx.signature.public_key = r.fixed<crypto::PublicKey>();
  tx.signature.r = r.fixed<crypto::Scalar>();
  tx.signature.s = r.fixed<crypto::Scalar>();
  r.finish();
  return tx;
}

Hash32 Transaction::hash() const { return crypto::keccak256(encode()); }

bool Transaction::verify() const { return crypto::verify(signature, signing_bytes(), sender); }

std::optional<Execution> execute(const LedgerState& parent, const std::vector<Transaction>& txs) {
  Execution out{parent, {}};
  out.receipts.reserve(txs.size());
  for (const auto& tx : txs) {
    auto& nonce = out.state.nonces[tx.sender];
    if (tx.nonce != nonce) return std::nullopt;
    ++nonce;
    out.receipts.push_back(apply_in_place(out.state.aid, tx.sender, tx.payload));
  }
  return out;
}

}  // namespace aid::ledger
