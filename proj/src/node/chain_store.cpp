#include "aid/node/chain_store.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <ostream>

#include "aid/node/json_util.hpp"

namespace aid::node {

using consensus::Block;
using Kind = StorageError::Kind;

std::string_view to_string(StorageError::Kind k) {
  switch (k) {
    case Kind::Io: return "StorageFailure";
    case Kind::ChecksumMismatch: return "ChecksumMismatch";
    case Kind::GapInChain: return "GapInChain";
    case Kind::HashMismatch: return "HashMismatch";
    case Kind::ValidationFailure: return "ValidationFailure";
  }
  return "?";
}

namespace {

[[noreturn]] void io_error(const std::string& what) {
  throw StorageError(Kind::Io, what + ": " + std::strerror(errno));
}

std::uint32_t crc(ByteView bytes) {
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void put32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Linkage, seals and re-execution of one block over `head`.
ledger::Execution check_next(const Block& b, const consensus::ChainHead& head, const consensus::ValidatorSet& vs) {
  const auto h = b.header.height;
  if (h != head.height + 1)
    throw StorageError(Kind::GapInChain,
                       "expected height " + std::to_string(head.height + 1) + ", found " + std::to_string(h));
  if (b.header.parent_hash != head.hash)
    throw StorageError(Kind::HashMismatch, "parent hash mismatch at height " + std::to_string(h));
  auto check = consensus::validate_block(b, head, vs);
  if (check.fault == consensus::BlockFault::BadStateRoot || check.fault == consensus::BlockFault::BadTxRoot)
    throw StorageError(Kind::HashMismatch, std::string(to_string(check.fault)) + " at height " + std::to_string(h));
  if (!check)
    throw StorageError(Kind::ValidationFailure,
                       std::string(to_string(check.fault)) + " at height " + std::to_string(h));
  if (!consensus::has_commit_quorum(b, vs))
    throw StorageError(Kind::ValidationFailure, "missing commit quorum at height " + std::to_string(h));
  return std::move(*check.execution);
}

void advance(consensus::ChainHead& head, const Block& b, ledger::LedgerState state) {
  head.height = b.header.height;
  head.hash = b.hash();
  head.timestamp = b.header.timestamp;
  head.state = std::move(state);
}

}  // namespace

ledger::LedgerState replay(const GenesisDoc& genesis, const std::vector<Block>& blocks) {
  auto vs = genesis.validator_set();
  auto head = genesis.head();
  for (const auto& b : blocks) {
    auto exec = check_next(b, head, vs);
    advance(head, b, std::move(exec.state));
  }
  return head.state;
}

ChainStore::ChainStore(std::string dir, GenesisDoc genesis)
    : dir_(std::move(dir)), genesis_(std::move(genesis)), validators_(genesis_.validator_set()), head_(genesis_.head()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError(Kind::Io, "cannot create " + dir_ + ": " + ec.message());

  auto g = std::make_shared<BlockRecord>();
  g->block = genesis_.block();
  g->hash = g->block.hash();
  blocks_.push_back(std::move(g));
  load();
}

ChainStore::~ChainStore() {
  if (fd_ >= 0) ::close(fd_);
}

std::string ChainStore::log_path() const { return (std::filesystem::path(dir_) / "blocks.log").string(); }

void ChainStore::load() {
  const auto path = log_path();
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_error("open " + path);

  Bytes data;
  {
    std::uint8_t buf[1 << 16];
    for (;;) {
      auto n = ::pread(fd_, buf, sizeof buf, static_cast<off_t>(data.size()));
      if (n < 0) io_error("read " + path);
      if (n == 0) break;
      data.insert(data.end(), buf, buf + n);
    }
  }

  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 4) break;
    const std::uint32_t len = be32(&data[pos]);
    if (data.size() - pos - 4 < std::uint64_t{len} + 4) break;
    ByteView body(&data[pos + 4], len);
    if (crc(body) != be32(&data[pos + 4 + len]))
      throw StorageError(Kind::ChecksumMismatch, "checksum mismatch in frame at offset " + std::to_string(pos) +
                                                     " (height " + std::to_string(head_.height + 1) + ")");
    Block b;
    try {
      b = Block::decode(body);
    } catch (const DecodeError& e) {
      throw StorageError(Kind::ValidationFailure, std::string("undecodable block: ") + e.what());
    }
    auto exec = check_next(b, head_, validators_);
    blocks_.push_back(record(b, exec));
    advance(head_, b, std::move(exec.state));
    pos += 4 + len + 4;
  }
  if (pos < data.size()) {
    truncated_ = data.size() - pos;
    if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) io_error("truncate " + path);
    if (::fsync(fd_) != 0) io_error("fsync " + path);
  }
}

std::shared_ptr<const BlockRecord> ChainStore::record(const Block& block, const ledger::Execution& exec) {
  auto r = std::make_shared<BlockRecord>();
  r->block = block;
  r->hash = block.hash();
  for (const auto& tx : block.transactions) r->tx_hashes.push_back(tx.hash());
  r->receipts = exec.receipts;
  return r;
}

std::shared_ptr<const BlockRecord> ChainStore::commit(const Block& block, const ledger::Execution& exec) {
  if (block.header.height != head_.height + 1)
    throw StorageError(Kind::GapInChain, "commit out of order at height " + std::to_string(block.header.height));
  if (block.header.parent_hash != head_.hash)
    throw StorageError(Kind::HashMismatch, "commit does not extend head");
  if (ledger::state_root(exec.state.aid) != block.header.state_root)
    throw StorageError(Kind::ValidationFailure, "execution does not match state_root");

  const Bytes body = block.encode();
  Bytes frame;
  frame.reserve(body.size() + 8);
  put32(frame, static_cast<std::uint32_t>(body.size()));
  frame.insert(frame.end(), body.begin(), body.end());
  put32(frame, crc(body));
  std::size_t off = 0;
  while (off < frame.size()) {
    auto n = ::write(fd_, frame.data() + off, frame.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("append " + log_path());
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd_) != 0) io_error("fsync " + log_path());

  auto r = record(block, exec);
  blocks_.push_back(r);
  advance(head_, block, exec.state);
  return r;
}

void ChainStore::export_text(std::ostream& os) const {
  os << "# chain " << genesis_.chain_id << " organization " << genesis_.organization.to_string() << "\n";
  for (const auto& r : blocks_) {
    const auto& h = r->block.header;
    os << "block " << h.height << " hash " << r->hash.to_string() << " parent " << h.parent_hash.to_string()
       << " proposer " << h.proposer.to_string() << " round " << h.round << " time " << h.timestamp
       << " txs " << r->block.transactions.size() << " state_root " << h.state_root.to_string() << "\n";
    for (std::size_t i = 0; i < r->block.transactions.size(); ++i) {
      const auto& tx = r->block.transactions[i];
      const auto& rc = r->receipts[i];
      os << "  tx " << r->tx_hashes[i].to_string() << " from " << tx.sender.to_string() << " nonce " << tx.nonce
         << " " << ledger::payload_name(tx.payload) << " -> "
         << (rc.ok() ? std::string("ok") : std::string(ledger::to_string(*rc.error))) << "\n";
      for (const auto& ev : rc.events) {
        os << "    event " << ledger::event_name(ev);
        if (auto who = ledger::event_recipient(ev)) os << " recipient " << who->to_string();
        if (const auto* f = std::get_if<ledger::FundsAdded>(&ev)) os << " amount " << f->amount.to_string();
        if (const auto* a = std::get_if<ledger::AllowanceSent>(&ev)) os << " amount " << a->amount.to_string();
        if (const auto* b = std::get_if<ledger::BankAccountRegistered>(&ev))
          os << " account_hash " << b->account_hash.to_string();
        os << "\n";
      }
    }
  }
}

}  // namespace aid::node
