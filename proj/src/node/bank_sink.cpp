#include "aid/node/bank_sink.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <httplib.h>
#include <json.hpp>

#include "aid/node/json_util.hpp"

namespace aid::node {

std::string BankInstruction::to_json() const {
  nlohmann::ordered_json j;
  j["block_height"] = block_height;
  j["tx_hash"] = tx_hash.to_string();
  j["event_index"] = event_index;
  j["recipient"] = recipient.to_string();
  j["account_hash"] = account_hash ? nlohmann::ordered_json(account_hash->to_string()) : nlohmann::ordered_json();
  j["amount"] = amount.to_string();
  j["manual_review"] = manual_review();
  return j.dump();
}

BankInstruction BankInstruction::from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  BankInstruction b;
  b.block_height = j.at("block_height").get<std::uint64_t>();
  auto h = Hash32::parse(j.at("tx_hash").get<std::string>());
  if (!h) throw std::invalid_argument("bad tx_hash");
  b.tx_hash = *h;
  b.event_index = j.at("event_index").get<std::uint32_t>();
  b.recipient = json_address(j.at("recipient"));
  if (!j.at("account_hash").is_null()) {
    auto a = Hash32::parse(j.at("account_hash").get<std::string>());
    if (!a) throw std::invalid_argument("bad account_hash");
    b.account_hash = *a;
  }
  auto amt = Amount::parse(j.at("amount").get<std::string>());
  if (!amt) throw std::invalid_argument("bad amount");
  b.amount = *amt;
  return b;
}

namespace {

// Appends one line and fsyncs. Starts on a fresh line if the file ends
// with a partial write.
void append_line(const std::string& path, const std::string& line) {
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw SinkUnavailable("open " + path + ": " + std::strerror(errno));
  std::string out;
  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size > 0) {
    char last = '\n';
    if (::pread(fd, &last, 1, size - 1) == 1 && last != '\n') out.push_back('\n');
  }
  out += line;
  out.push_back('\n');
  bool ok = ::write(fd, out.data(), out.size()) == static_cast<ssize_t>(out.size()) && ::fdatasync(fd) == 0;
  int err = errno;
  ::close(fd);
  if (!ok) throw SinkUnavailable("append " + path + ": " + std::strerror(err));
}

std::vector<std::string> complete_lines(const std::string& path) {
  std::vector<std::string> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] != '\n') continue;
    if (i > start) out.push_back(all.substr(start, i - start));
    start = i + 1;
  }
  return out;  // anything after the last newline is a torn write
}

}  // namespace

FileWriter::FileWriter(std::string path) : path_(std::move(path)) {
  for (const auto& b : read_all(path_)) keys_.insert(b.key());
}

std::vector<BankInstruction> FileWriter::read_all(const std::string& path) {
  std::vector<BankInstruction> out;
  for (const auto& line : complete_lines(path)) {
    try {
      out.push_back(BankInstruction::from_json(line));
    } catch (const std::exception&) {
      // a torn line followed by a later append; it was never acknowledged
    }
  }
  return out;
}

void FileWriter::deliver(const BankInstruction& instr) {
  if (delivered(instr.key())) return;
  append_line(path_, instr.to_json());
  keys_.insert(instr.key());
}

WebhookWriter::WebhookWriter(std::string url, std::string journal_path)
    : url_(std::move(url)), journal_(std::move(journal_path)) {
  for (const auto& b : FileWriter::read_all(journal_)) keys_.insert(b.key());
}

void WebhookWriter::deliver(const BankInstruction& instr) {
  if (delivered(instr.key())) return;
  // split "http://host:port/path"
  const std::string prefix = "http://";
  if (url_.rfind(prefix, 0) != 0) throw SinkUnavailable("unsupported webhook url " + url_);
  auto slash = url_.find('/', prefix.size());
  std::string origin = slash == std::string::npos ? url_ : url_.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : url_.substr(slash);
  httplib::Client cli(origin);
  cli.set_connection_timeout(2, 0);
  cli.set_read_timeout(5, 0);
  auto res = cli.Post(path, instr.to_json(), "application/json");
  if (!res) throw SinkUnavailable("webhook unreachable: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw SinkUnavailable("webhook answered " + std::to_string(res->status));
  append_line(journal_, instr.to_json());
  keys_.insert(instr.key());
}

bool MemoryWriter::delivered(const BankInstruction::Key& key) const {
  std::lock_guard lk(mu_);
  for (const auto& r : records_)
    if (r.key() == key) return true;
  return false;
}

void MemoryWriter::deliver(const BankInstruction& instr) {
  std::lock_guard lk(mu_);
  if (failures_ > 0) {
    --failures_;
    throw SinkUnavailable("simulated outage");
  }
  for (const auto& r : records_)
    if (r.key() == instr.key()) return;
  records_.push_back(instr);
}

std::vector<BankInstruction> MemoryWriter::records() const {
  std::lock_guard lk(mu_);
  return records_;
}

void MemoryWriter::fail_next(int n) {
  std::lock_guard lk(mu_);
  failures_ = n;
}

BankSink::BankSink(std::unique_ptr<InstructionWriter> writer, std::uint64_t initial_backoff_ms,
                   std::uint64_t max_backoff_ms)
    : writer_(std::move(writer)), initial_backoff_(initial_backoff_ms), max_backoff_(max_backoff_ms) {
  thread_ = std::thread([this] { run(); });
}

BankSink::~BankSink() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void BankSink::emit(BankInstruction instr) {
  {
    std::lock_guard lk(mu_);
    queue_.push_back(std::move(instr));
  }
  cv_.notify_all();
}

bool BankSink::flush(std::uint64_t timeout_ms) {
  std::unique_lock lk(mu_);
  return drained_.wait_for(lk, std::chrono::milliseconds(timeout_ms), [this] { return queue_.empty() && !busy_; });
}

std::size_t BankSink::queued() const {
  std::lock_guard lk(mu_);
  return queue_.size();
}

std::uint64_t BankSink::failures() const {
  std::lock_guard lk(mu_);
  return failures_;
}

void BankSink::run() {
  std::uint64_t backoff = initial_backoff_;
  std::unique_lock lk(mu_);
  for (;;) {
    cv_.wait(lk, [this] { return stop_ || !queue_.empty(); });
    if (stop_) return;
    BankInstruction next = queue_.front();
    busy_ = true;
    lk.unlock();
    bool ok = true;
    try {
      if (!writer_->delivered(next.key())) writer_->deliver(next);
    } catch (const SinkUnavailable&) {
      ok = false;
    }
    lk.lock();
    busy_ = false;
    if (ok) {
      queue_.pop_front();
      backoff = initial_backoff_;
      if (queue_.empty()) drained_.notify_all();
      continue;
    }
    ++failures_;
    cv_.wait_for(lk, std::chrono::milliseconds(backoff), [this] { return stop_; });
    if (stop_) return;
    backoff = std::min(backoff * 2, max_backoff_);
  }
}

std::unique_ptr<InstructionWriter> make_writer(const std::string& spec, const std::string& data_dir) {
  if (spec.rfind("http://", 0) == 0)
    return std::make_unique<WebhookWriter>(spec, (std::filesystem::path(data_dir) / "webhook.journal").string());
  std::string path = spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
  if (path.empty()) throw std::invalid_argument("empty bank sink path");
  return std::make_unique<FileWriter>(path);
}

}  // namespace aid::node
