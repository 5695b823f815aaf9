#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "aid/node/api.hpp"
#include "aid/node/config.hpp"

namespace httplib {
class Server;
}

namespace aid::node {

class PeerLink;

/// A node process: HTTP front end (client API and /p2p), one event-loop
/// thread that owns NodeCore, and one sender thread per peer. Readers see
/// an immutable View swapped after each change.
class NodeRuntime {
 public:
  explicit NodeRuntime(NodeConfig cfg);
  ~NodeRuntime();
  NodeRuntime(const NodeRuntime&) = delete;
  NodeRuntime& operator=(const NodeRuntime&) = delete;

  /// Binds the listener (port 0: ephemeral) and starts the threads.
  void start();
  void stop();

  int port() const { return port_; }
  /// Base URL this node advertises to peers.
  std::string url() const;
  /// Peers may be set before or after start.
  void set_peers(const std::vector<std::string>& urls);

  std::shared_ptr<const View> view() const;
  SubmitResult submit(const ledger::Transaction& tx);
  /// Polls the view until `pred` holds; false on timeout.
  bool wait_for(const std::function<bool(const View&)>& pred, std::uint64_t timeout_ms) const;
  /// Waits for queued bank instructions to be delivered.
  bool flush_sink(std::uint64_t timeout_ms);
  /// True after a storage failure stopped the node.
  bool halted() const { return halted_; }
  const NodeConfig& config() const { return cfg_; }
  const Api& api() const { return *api_; }

 private:
  using Clock = std::chrono::steady_clock;
  static std::uint64_t wall_ms();

  void post(std::function<void()> task);
  void loop();
  void apply(Outbox box);
  void publish();

  NodeConfig cfg_;
  std::unique_ptr<ChainStore> store_;
  std::unique_ptr<BankSink> sink_;
  std::unique_ptr<NodeCore> core_;
  std::unique_ptr<Api> api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::thread loop_thread_;
  int port_ = 0;

  mutable std::mutex view_mu_;
  std::shared_ptr<const View> view_;

  std::mutex loop_mu_;
  std::condition_variable loop_cv_;
  std::deque<std::function<void()>> tasks_;
  std::multimap<Clock::time_point, std::uint64_t> timers_;
  bool stopping_ = false;
  bool started_ = false;
  std::atomic<bool> halted_{false};

  std::mutex peers_mu_;
  std::map<std::string, std::unique_ptr<PeerLink>> peers_;
};

/// Disconnects every node from its peers before stopping any, so no
/// listener waits out idle keep-alive connections from a sibling.
void stop_all(const std::vector<std::unique_ptr<NodeRuntime>>& nodes);

}  // namespace aid::node
