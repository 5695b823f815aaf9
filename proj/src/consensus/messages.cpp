#include "aid/consensus/messages.hpp"

#include "aid/crypto/keccak.hpp"

namespace aid::consensus {

namespace {

enum Tag : std::uint8_t { kProposal = 1, kPrepare = 2, kCommit = 3, kRoundChange = 4 };

Bytes vote_bytes(Tag tag, std::uint64_t height, std::uint64_t round, const Hash32* hash, const Address& signer) {
  Writer w;
  w.u8(tag).u64(height).u64(round);
  if (hash) w.fixed(*hash);
  w.fixed(signer);
  return std::move(w).take();
}

void write_sig(Writer& w, const crypto::Signature& s) { w.fixed(s.r).fixed(s.s).fixed(s.public_key); }

crypto::Signature read_sig(Reader& r) {
  crypto::Signature s;
  s.r = r.fixed<crypto::Scalar>();
  s.s = r.fixed<crypto::Scalar>();
  s.public_key = r.fixed<crypto::PublicKey>();
  return s;
}

}  // namespace

std::uint64_t message_height(const ConsensusMessage& m) {
  return std::visit([](const auto& v) { return v.height; }, m);
}

std::uint64_t message_round(const ConsensusMessage& m) {
  if (auto* rc = std::get_if<RoundChange>(&m)) return rc->new_round;
  return std::visit(
      [](const auto& v) -> std::uint64_t {
        if constexpr (requires { v.round; })
          return v.round;
        else
          return 0;
      },
      m);
}

const Address& message_signer(const ConsensusMessage& m) {
  return std::visit([](const auto& v) -> const Address& { return v.signer; }, m);
}

std::string_view message_type(const ConsensusMessage& m) {
  static constexpr std::string_view names[] = {"Proposal", "Prepare", "Commit", "RoundChange"};
  return names[m.index()];
}

Bytes proposal_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                             const Address& signer) {
  return vote_bytes(kProposal, height, round, &block_hash, signer);
}
Bytes prepare_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                            const Address& signer) {
  return vote_bytes(kPrepare, height, round, &block_hash, signer);
}
Bytes commit_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                           const Address& signer) {
  return vote_bytes(kCommit, height, round, &block_hash, signer);
}
Bytes round_change_signing_bytes(std::uint64_t height, std::uint64_t round, const Address& signer) {
  return vote_bytes(kRoundChange, height, round, nullptr, signer);
}

Proposal make_proposal(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, Block block) {
  Proposal p{height, round, std::move(block), key.address(), {}};
  p.signature = crypto::sign(key, proposal_signing_bytes(height, round, p.block.hash(), p.signer));
  return p;
}

Prepare make_prepare(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, const Hash32& hash) {
  Prepare p{height, round, hash, key.address(), {}};
  p.signature = crypto::sign(key, prepare_signing_bytes(height, round, hash, p.signer));
  return p;
}

Commit make_commit(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, const Hash32& hash) {
  Commit c{height, round, hash, key.address(), {}};
  c.signature = crypto::sign(key, commit_signing_bytes(height, round, hash, c.signer));
  return c;
}

RoundChange make_round_change(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round) {
  RoundChange rc{height, round, key.address(), {}};
  rc.signature = crypto::sign(key, round_change_signing_bytes(height, round, rc.signer));
  return rc;
}

bool verify_message(const ConsensusMessage& m) {
  struct Check {
    bool operator()(const Proposal& p) const {
      return crypto::verify(p.signature, proposal_signing_bytes(p.height, p.round, p.block.hash(), p.signer),
                            p.signer);
    }
    bool operator()(const Prepare& p) const {
      return crypto::verify(p.signature, prepare_signing_bytes(p.height, p.round, p.block_hash, p.signer), p.signer);
    }
    bool operator()(const Commit& c) const {
      return crypto::verify(c.signature, commit_signing_bytes(c.height, c.round, c.block_hash, c.signer), c.signer);
    }
    bool operator()(const RoundChange& rc) const {
      return crypto::verify(rc.signature, round_change_signing_bytes(rc.height, rc.new_round, rc.signer), rc.signer);
    }
  };
  return std::visit(Check{}, m);
}

bool verify_seal(const CommitSeal& seal, std::uint64_t height, const Hash32& block_hash) {
  return crypto::verify(seal.signature, commit_signing_bytes(height, seal.round, block_hash, seal.validator),
                        seal.validator);
}

Bytes encode(const ConsensusMessage& m) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(m.index() + 1));
  std::visit(
      [&w](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        w.u64(v.height);
        if constexpr (std::is_same_v<T, RoundChange>) {
          w.u64(v.new_round);
        } else {
          w.u64(v.round);
          if constexpr (std::is_same_v<T, Proposal>)
            w.bytes(v.block.encode());
          else
            w.fixed(v.block_hash);
        }
        w.fixed(v.signer);
        write_sig(w, v.signature);
      },
      m);
  return std::move(w).take();
}

ConsensusMessage decode_message(ByteView bytes) {
  Reader r(bytes);
  auto tag = r.u8();
  auto height = r.u64();
  auto round = r.u64();
  ConsensusMessage out;
  switch (tag) {
    case kProposal: {
      auto block = Block::decode(r.bytes());
      auto signer = r.fixed<Address>();
      out = Proposal{height, round, std::move(block), signer, read_sig(r)};
      break;
    }
    case kPrepare:
    case kCommit: {
      auto hash = r.fixed<Hash32>();
      auto signer = r.fixed<Address>();
      auto sig = read_sig(r);
      if (tag == kPrepare)
        out = Prepare{height, round, hash, signer, sig};
      else
        out = Commit{height, round, hash, signer, sig};
      break;
    }
    case kRoundChange: {
      auto signer = r.fixed<Address>();
      out = RoundChange{height, round, signer, read_sig(r)};
      break;
    }
    default:
      throw DecodeError("unknown consensus message tag");
  }
  r.finish();
  return out;
}

Hash32 message_hash(const ConsensusMessage& m) { return crypto::keccak256(encode(m)); }

}  // namespace aid::consensus
