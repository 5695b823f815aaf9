#include "aid/consensus/wire.hpp"

namespace aid::consensus {

namespace {
enum : std::uint8_t { kConsensus = 1, kTx = 2, kBlock = 3 };
}

Bytes encode_net(const NetMessage& m) {
  Bytes out;
  if (const auto* c = std::get_if<ConsensusMessage>(&m)) {
    out.push_back(kConsensus);
    auto body = encode(*c);
    out.insert(out.end(), body.begin(), body.end());
  } else if (const auto* t = std::get_if<TxGossip>(&m)) {
    out.push_back(kTx);
    auto body = t->tx.encode();
    out.insert(out.end(), body.begin(), body.end());
  } else {
    out.push_back(kBlock);
    auto body = std::get<BlockSync>(m).block.encode();
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

NetMessage decode_net(ByteView bytes) {
  if (bytes.empty()) throw DecodeError("empty network message");
  auto body = bytes.subspan(1);
  switch (bytes[0]) {
    case kConsensus: return decode_message(body);
    case kTx: return TxGossip{ledger::Transaction::decode(body)};
    case kBlock: return BlockSync{Block::decode(body)};
  }
  throw DecodeError("unknown network message kind");
}

std::string net_message_type(ByteView bytes) {
  if (bytes.size() < 2) return "invalid";
  switch (bytes[0]) {
    case kConsensus:
      switch (bytes[1]) {
        case 1: return "Proposal";
        case 2: return "Prepare";
        case 3: return "Commit";
        case 4: return "RoundChange";
      }
      return "invalid";
    case kTx: return "TxGossip";
    case kBlock: return "BlockSync";
  }
  return "invalid";
}

}  // namespace aid::consensus
