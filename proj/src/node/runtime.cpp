#include "aid/node/runtime.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <future>

namespace aid::node {

/// Delivers payloads to one peer's /p2p endpoint in order. Failed sends
/// are dropped; consensus recovers through round changes and block sync.
class PeerLink {
 public:
  PeerLink(std::string url, std::string origin) : url_(std::move(url)), origin_(std::move(origin)) {
    thread_ = std::thread([this] { run(); });
  }
  ~PeerLink() {
    {
      std::lock_guard lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
  void send(Bytes payload) {
    {
      std::lock_guard lk(mu_);
      if (queue_.size() >= kMaxQueue) queue_.pop_front();
      queue_.push_back(std::move(payload));
    }
    cv_.notify_all();
  }

 private:
  static constexpr std::size_t kMaxQueue = 10'000;

  void run() {
    httplib::Client cli(url_);
    cli.set_connection_timeout(1, 0);
    cli.set_read_timeout(5, 0);
    cli.set_write_timeout(5, 0);
    cli.set_keep_alive(true);
    const httplib::Headers headers{{"X-Aid-Origin", origin_}};
    std::unique_lock lk(mu_);
    for (;;) {
      cv_.wait(lk, [this] { return stop_ || !queue_.empty(); });
      if (stop_) return;
      Bytes next = std::move(queue_.front());
      queue_.pop_front();
      lk.unlock();
      std::string body(next.begin(), next.end());
      auto res = cli.Post("/p2p", headers, body, "application/octet-stream");
      if (!res) {
        // Peer down: back off briefly so a dead peer does not spin.
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      lk.lock();
    }
  }

  std::string url_;
  std::string origin_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> queue_;
  bool stop_ = false;
  std::thread thread_;
};

NodeRuntime::NodeRuntime(NodeConfig cfg) : cfg_(std::move(cfg)) {
  auto genesis = GenesisDoc::load(cfg_.genesis_path);
  store_ = std::make_unique<ChainStore>(cfg_.data_dir, genesis);
  if (store_->truncated_bytes() > 0)
    spdlog::warn("block log: dropped {} bytes of an incomplete trailing frame", store_->truncated_bytes());
  std::optional<crypto::KeyPair> key;
  if (!cfg_.key_path.empty()) key = load_key(cfg_.key_path);
  if (!cfg_.bank_sink.empty()) sink_ = std::make_unique<BankSink>(make_writer(cfg_.bank_sink, cfg_.data_dir));
  consensus::EngineConfig ec;
  ec.base_timeout_ms = cfg_.base_timeout_ms;
  ec.empty_blocks = cfg_.empty_blocks;
  const bool strict = cfg_.strict_bank_account_mode.value_or(genesis.strict_bank_account_mode);
  core_ = std::make_unique<NodeCore>(*store_, key, ec, strict, sink_.get());
  view_ = core_->view();
  api_ = std::make_unique<Api>([this] { return view(); }, [this](const ledger::Transaction& tx) { return submit(tx); });
  set_peers(cfg_.peers);
}

NodeRuntime::~NodeRuntime() { stop(); }

std::uint64_t NodeRuntime::wall_ms() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
}

std::string NodeRuntime::url() const {
  if (!cfg_.advertise.empty()) return cfg_.advertise;
  return "http://" + cfg_.host() + ":" + std::to_string(port_);
}

void NodeRuntime::set_peers(const std::vector<std::string>& urls) {
  std::lock_guard lk(peers_mu_);
  std::map<std::string, std::unique_ptr<PeerLink>> next;
  const auto origin = url();
  for (const auto& u : urls) {
    if (u == origin) continue;
    auto it = peers_.find(u);
    if (it != peers_.end())
      next.emplace(u, std::move(it->second));
    else
      next.emplace(u, std::make_unique<PeerLink>(u, origin));
  }
  peers_ = std::move(next);
}

void NodeRuntime::start() {
  if (started_) return;
  started_ = true;
  server_ = std::make_unique<httplib::Server>();
  server_->set_keep_alive_timeout(1);
  server_->Post("/p2p", [this](const httplib::Request& req, httplib::Response& res) {
    auto origin = req.get_header_value("X-Aid-Origin");
    Bytes payload(req.body.begin(), req.body.end());
    post([this, origin, payload = std::move(payload)] { apply(core_->on_network(origin, payload, wall_ms())); });
    res.status = 204;
  });
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    auto out = api_->handle(r);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);

  const auto host = cfg_.host();
  const int want = cfg_.port();
  port_ = want == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, want) ? want : -1);
  if (port_ <= 0) throw std::runtime_error("cannot listen on " + cfg_.listen);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  set_peers([this] {
    std::lock_guard lk(peers_mu_);
    std::vector<std::string> urls;
    for (const auto& [u, _] : peers_) urls.push_back(u);
    return urls;
  }());  // origin header changes once the port is known

  loop_thread_ = std::thread([this] { loop(); });
  post([this] { apply(core_->start(wall_ms())); });
}

void NodeRuntime::stop() {
  if (!started_) return;
  started_ = false;
  {
    // Close our outbound connections first so peers' servers are not left
    // holding them open.
    std::lock_guard lk(peers_mu_);
    peers_.clear();
  }
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  {
    std::lock_guard lk(loop_mu_);
    stopping_ = true;
  }
  loop_cv_.notify_all();
  if (loop_thread_.joinable()) loop_thread_.join();
  std::lock_guard lk(peers_mu_);
  peers_.clear();
}

void stop_all(const std::vector<std::unique_ptr<NodeRuntime>>& nodes) {
  for (const auto& n : nodes) n->set_peers({});
  for (const auto& n : nodes) n->stop();
}

void NodeRuntime::post(std::function<void()> task) {
  {
    std::lock_guard lk(loop_mu_);
    if (stopping_) return;
    tasks_.push_back(std::move(task));
  }
  loop_cv_.notify_all();
}

void NodeRuntime::loop() {
  std::unique_lock lk(loop_mu_);
  for (;;) {
    if (stopping_) return;
    if (!tasks_.empty()) {
      auto task = std::move(tasks_.front());
      tasks_.pop_front();
      lk.unlock();
      if (!halted_) {
        try {
          task();
        } catch (const StorageError& e) {
          // fail-stop: a node that cannot persist must not keep voting
          spdlog::critical("storage failure, node halted: {}", e.what());
          halted_ = true;
        }
      }
      lk.lock();
      continue;
    }
    if (!timers_.empty() && timers_.begin()->first <= Clock::now()) {
      auto id = timers_.begin()->second;
      timers_.erase(timers_.begin());
      tasks_.push_back([this, id] { apply(core_->on_timer(id, wall_ms())); });
      continue;
    }
    if (timers_.empty())
      loop_cv_.wait(lk);
    else
      loop_cv_.wait_until(lk, timers_.begin()->first);
  }
}

void NodeRuntime::apply(Outbox box) {
  {
    std::lock_guard lk(loop_mu_);
    for (const auto& [id, delay] : box.timers) timers_.emplace(Clock::now() + std::chrono::milliseconds(delay), id);
  }
  {
    std::lock_guard lk(peers_mu_);
    for (const auto& m : box.broadcast)
      for (auto& [_, link] : peers_) link->send(m);
    for (auto& [peer, m] : box.direct) {
      auto it = peers_.find(peer);  // only answer configured peers
      if (it != peers_.end()) it->second->send(std::move(m));
    }
  }
  for (const auto& rec : box.committed)
    spdlog::debug("finalized height {} ({} txs)", rec->block.header.height, rec->block.transactions.size());
  publish();
}

void NodeRuntime::publish() {
  auto v = core_->view();
  std::lock_guard lk(view_mu_);
  view_ = std::move(v);
}

std::shared_ptr<const View> NodeRuntime::view() const {
  std::lock_guard lk(view_mu_);
  return view_;
}

SubmitResult NodeRuntime::submit(const ledger::Transaction& tx) {
  auto promise = std::make_shared<std::promise<SubmitResult>>();
  auto fut = promise->get_future();
  post([this, tx, promise] {
    SubmitResult r;
    try {
      auto box = core_->submit(tx, wall_ms(), r);
      apply(std::move(box));
    } catch (...) {
      promise->set_exception(std::current_exception());
      throw;
    }
    promise->set_value(r);
  });
  if (fut.wait_for(std::chrono::seconds(10)) != std::future_status::ready)
    throw std::runtime_error("node is not processing submissions");
  return fut.get();
}

bool NodeRuntime::wait_for(const std::function<bool(const View&)>& pred, std::uint64_t timeout_ms) const {
  const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    if (pred(*view())) return true;
    if (Clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

bool NodeRuntime::flush_sink(std::uint64_t timeout_ms) { return !sink_ || sink_->flush(timeout_ms); }

}  // namespace aid::node
