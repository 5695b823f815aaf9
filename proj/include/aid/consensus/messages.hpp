#pragma once

#include <variant>

#include "aid/consensus/block.hpp"

namespace aid::consensus {

struct Proposal {
  std::uint64_t height = 0;
  std::uint64_t round = 0;
  Block block;
  Address signer;
  crypto::Signature signature;
  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Prepare {
  std::uint64_t height = 0;
  std::uint64_t round = 0;
  Hash32 block_hash;
  Address signer;
  crypto::Signature signature;
  friend bool operator==(const Prepare&, const Prepare&) = default;
};

/// The signature doubles as the commit seal stored in the finalized block.
struct Commit {
  std::uint64_t height = 0;
  std::uint64_t round = 0;
  Hash32 block_hash;
  Address signer;
  crypto::Signature signature;
  friend bool operator==(const Commit&, const Commit&) = default;
};

struct RoundChange {
  std::uint64_t height = 0;
  std::uint64_t new_round = 0;
  Address signer;
  crypto::Signature signature;
  friend bool operator==(const RoundChange&, const RoundChange&) = default;
};

using ConsensusMessage = std::variant<Proposal, Prepare, Commit, RoundChange>;

std::uint64_t message_height(const ConsensusMessage& m);
std::uint64_t message_round(const ConsensusMessage& m);
const Address& message_signer(const ConsensusMessage& m);
std::string_view message_type(const ConsensusMessage& m);

// Bytes covered by each signature: a kind tag then every other field, with
// the proposal's block represented by its header hash.
Bytes proposal_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                             const Address& signer);
Bytes prepare_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                            const Address& signer);
Bytes commit_signing_bytes(std::uint64_t height, std::uint64_t round, const Hash32& block_hash,
                           const Address& signer);
Bytes round_change_signing_bytes(std::uint64_t height, std::uint64_t round, const Address& signer);

Proposal make_proposal(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, Block block);
Prepare make_prepare(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, const Hash32& hash);
Commit make_commit(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round, const Hash32& hash);
RoundChange make_round_change(const crypto::KeyPair& key, std::uint64_t height, std::uint64_t round);

/// Signature check against the claimed signer; membership is checked by the
/// caller.
bool verify_message(const ConsensusMessage& m);
bool verify_seal(const CommitSeal& seal, std::uint64_t height, const Hash32& block_hash);

Bytes encode(const ConsensusMessage& m);
ConsensusMessage decode_message(ByteView bytes);
Hash32 message_hash(const ConsensusMessage& m);

}  // namespace aid::consensus
