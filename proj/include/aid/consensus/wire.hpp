#pragma once

#include "aid/consensus/messages.hpp"

namespace aid::consensus {

/// A transaction relayed between nodes' mempools.
struct TxGossip {
  ledger::Transaction tx;
  friend bool operator==(const TxGossip&, const TxGossip&) = default;
};

/// A finalized block with its seals, sent to a peer that is behind.
struct BlockSync {
  Block block;
  friend bool operator==(const BlockSync&, const BlockSync&) = default;
};

using NetMessage = std::variant<ConsensusMessage, TxGossip, BlockSync>;

/// u8 kind (1 consensus, 2 tx, 3 block) followed by the body.
Bytes encode_net(const NetMessage& m);
NetMessage decode_net(ByteView bytes);
/// Short type name for logs and traces, without decoding the full body.
std::string net_message_type(ByteView bytes);

}  // namespace aid::consensus
