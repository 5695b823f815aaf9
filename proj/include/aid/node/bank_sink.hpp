#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "aid/ledger/types.hpp"

namespace aid::node {

/// Off-chain transfer order derived from one finalized AllowanceSent event.
struct BankInstruction {
  std::uint64_t block_height = 0;
  Hash32 tx_hash;
  std::uint32_t event_index = 0;  // position in the transaction's receipt
  Address recipient;
  std::optional<AccountHash> account_hash;  // absent: needs manual handling
  Amount amount;

  using Key = std::tuple<std::uint64_t, Hash32, std::uint32_t>;
  Key key() const { return {block_height, tx_hash, event_index}; }
  bool manual_review() const { return !account_hash.has_value(); }

  std::string to_json() const;
  static BankInstruction from_json(const std::string& line);
  friend bool operator==(const BankInstruction&, const BankInstruction&) = default;
};

struct SinkUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Destination of instructions. Implementations remember what they have
/// delivered so a restart does not deliver twice.
class InstructionWriter {
 public:
  virtual ~InstructionWriter() = default;
  virtual bool delivered(const BankInstruction::Key& key) const = 0;
  /// Throws SinkUnavailable when the destination cannot take it right now.
  virtual void deliver(const BankInstruction& instr) = 0;
  virtual std::string describe() const = 0;
};

/// JSON lines appended to a file and fsynced. A torn final line is ignored.
class FileWriter : public InstructionWriter {
 public:
  explicit FileWriter(std::string path);
  bool delivered(const BankInstruction::Key& key) const override { return keys_.count(key) > 0; }
  void deliver(const BankInstruction& instr) override;
  std::string describe() const override { return "file:" + path_; }
  static std::vector<BankInstruction> read_all(const std::string& path);

 private:
  std::string path_;
  std::set<BankInstruction::Key> keys_;
};

/// POSTs each instruction as JSON to an http:// URL; delivered keys are
/// journaled locally.
class WebhookWriter : public InstructionWriter {
 public:
  WebhookWriter(std::string url, std::string journal_path);
  bool delivered(const BankInstruction::Key& key) const override { return keys_.count(key) > 0; }
  void deliver(const BankInstruction& instr) override;
  std::string describe() const override { return url_; }

 private:
  std::string url_;
  std::string journal_;
  std::set<BankInstruction::Key> keys_;
};

/// In-process writer for tests; `fail_next` simulates an outage.
class MemoryWriter : public InstructionWriter {
 public:
  bool delivered(const BankInstruction::Key& key) const override;
  void deliver(const BankInstruction& instr) override;
  std::string describe() const override { return "memory"; }
  std::vector<BankInstruction> records() const;
  void fail_next(int n);

 private:
  mutable std::mutex mu_;
  std::vector<BankInstruction> records_;
  int failures_ = 0;
};

/// Queues instructions and delivers them in order on a background thread,
/// retrying with capped exponential backoff. emit() never blocks on the
/// destination.
class BankSink {
 public:
  explicit BankSink(std::unique_ptr<InstructionWriter> writer, std::uint64_t initial_backoff_ms = 100,
                    std::uint64_t max_backoff_ms = 5'000);
  ~BankSink();
  BankSink(const BankSink&) = delete;
  BankSink& operator=(const BankSink&) = delete;

  void emit(BankInstruction instr);
  /// Waits until the queue drains; false on timeout.
  bool flush(std::uint64_t timeout_ms);
  std::size_t queued() const;
  std::uint64_t failures() const;
  InstructionWriter& writer() { return *writer_; }

 private:
  void run();

  std::unique_ptr<InstructionWriter> writer_;
  std::uint64_t initial_backoff_, max_backoff_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable drained_;
  std::deque<BankInstruction> queue_;
  bool busy_ = false;
  bool stop_ = false;
  std::uint64_t failures_ = 0;
  std::thread thread_;
};

/// "file:<path>", "http://host:port/path", or a bare path (file).
std::unique_ptr<InstructionWriter> make_writer(const std::string& spec, const std::string& data_dir);

}  // namespace aid::node
