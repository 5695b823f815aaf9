#include "aid/consensus/block.hpp"

#include "aid/crypto/keccak.hpp"

namespace aid::consensus {

Bytes BlockHeader::encode() const {
  Writer w;
  w.u64(height).fixed(parent_hash).fixed(tx_root).fixed(state_root).fixed(proposer).u64(round).u64(timestamp);
  return std::move(w).take();
}

BlockHeader BlockHeader::decode(Reader& r) {
  BlockHeader h;
  h.height = r.u64();
  h.parent_hash = r.fixed<Hash32>();
  h.tx_root = r.fixed<Hash32>();
  h.state_root = r.fixed<Hash32>();
  h.proposer = r.fixed<Address>();
  h.round = r.u64();
  h.timestamp = r.u64();
  return h;
}

Hash32 BlockHeader::hash() const { return crypto::keccak256(encode()); }

Bytes Block::encode() const {
  Writer w;
  w.raw(header.encode());
  w.u32(static_cast<std::uint32_t>(transactions.size()));
  for (const auto& tx : transactions) w.bytes(tx.encode());
  w.u32(static_cast<std::uint32_t>(commit_seals.size()));
  for (const auto& seal : commit_seals)
    w.fixed(seal.validator)
        .u64(seal.round)
        .fixed(seal.signature.r)
        .fixed(seal.signature.s)
        .fixed(seal.signature.public_key);
  return std::move(w).take();
}

Block Block::decode(ByteView bytes) {
  Reader r(bytes);
  Block b;
  b.header = BlockHeader::decode(r);
  auto ntx = r.u32();
  if (ntx > r.remaining()) throw DecodeError("transaction count exceeds input");
  for (std::uint32_t i = 0; i < ntx; ++i) b.transactions.push_back(ledger::Transaction::decode(r.bytes()));
  auto nseal = r.u32();
  if (nseal > r.remaining()) throw DecodeError("seal count exceeds input");
  for (std::uint32_t i = 0; i < nseal; ++i) {
    CommitSeal seal;
    seal.validator = r.fixed<Address>();
    seal.round = r.u64();
    seal.signature.r = r.fixed<crypto::Scalar>();
    seal.signature.s = r.fixed<crypto::Scalar>();
    seal.signature.public_key = r.fixed<crypto::PublicKey>();
    b.commit_seals.push_back(seal);
  }
  r.finish();
  return b;
}

Hash32 tx_root(const std::vector<ledger::Transaction>& txs) {
  crypto::Keccak256 h;
  for (const auto& tx : txs) h.update(tx.hash().view());
  return h.finalize();
}

Block genesis_block(const Address& organization, std::uint64_t timestamp) {
  Block b;
  b.header.height = 0;
  b.header.tx_root = tx_root({});
  b.header.state_root = ledger::state_root(ledger::init(organization));
  b.header.timestamp = timestamp;
  return b;
}

}  // namespace aid::consensus
