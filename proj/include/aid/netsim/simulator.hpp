#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aid/core/bytes.hpp"

namespace aid::netsim {

using NodeId = std::size_t;

struct UnknownNode : std::out_of_range {
  explicit UnknownNode(NodeId id) : std::out_of_range("unknown node " + std::to_string(id)) {}
};

struct UnknownDirective : std::invalid_argument {
  explicit UnknownDirective(const std::string& what) : std::invalid_argument("unknown fault directive: " + what) {}
};

/// While active, messages between a node in `a` and a node in `b` (either
/// direction) are dropped. Active for start_ms <= t < end_ms.
struct Partition {
  std::set<NodeId> a;
  std::set<NodeId> b;
  std::uint64_t start_ms = 0;
  std::uint64_t end_ms = 0;
};

struct SimConfig {
  std::uint64_t seed = 0;
  std::uint64_t latency_min = 10;
  std::uint64_t latency_max = 50;
  double drop_rate = 0.0;
  std::vector<Partition> partitions;
  /// Large sweeps turn this off; hashing every payload is not free.
  bool record_trace = true;

  void validate() const;
};

struct Crash {
  NodeId node = 0;
  std::uint64_t at_ms = 0;
};
struct Equivocate {
  NodeId node = 0;
};
struct DelayAll {
  NodeId node = 0;
  std::uint64_t extra_ms = 0;
};
using FaultDirective = std::variant<Crash, Equivocate, DelayAll>;

/// "crash <node> <time-ms>", "equivocate <node>", "delay <node> <extra-ms>".
FaultDirective parse_directive(const std::string& text);
std::string to_string(const FaultDirective& d);

struct TraceRecord {
  enum class Kind { Deliver, Drop, Timer, Inject, Limit };
  std::uint64_t time = 0;
  Kind kind = Kind::Deliver;
  NodeId from = 0;
  NodeId to = 0;
  std::string message_type;
  Hash32 message_hash;

  /// "<time> <kind> <from> <to> <type> <hash>", '-' for empty fields.
  std::string to_line() const;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string_view to_string(TraceRecord::Kind k);

class Simulator;

/// A node's view of the simulator while one of its callbacks runs.
class Context {
 public:
  NodeId self() const { return self_; }
  std::uint64_t now() const;
  void send(NodeId to, Bytes payload);
  /// Every other registered node.
  void broadcast(const Bytes& payload);
  void set_timer(std::uint64_t delay_ms, std::uint64_t timer_id);
  std::mt19937_64& rng();
  std::size_t node_count() const;

 private:
  friend class Simulator;
  Context(Simulator& sim, NodeId self) : sim_(sim), self_(self) {}
  Simulator& sim_;
  NodeId self_;
};

class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual void on_start(Context&) {}
  virtual void on_message(Context& ctx, NodeId from, const Bytes& payload) = 0;
  virtual void on_timer(Context&, std::uint64_t /*timer_id*/) {}
  /// Switches the program to equivocating behavior. Programs that have no
  /// such mode reject the directive.
  virtual void make_equivocator() { throw std::logic_error("program cannot equivocate"); }
};

struct RunResult {
  bool reached = false;  // predicate held; false means the time limit ran out
  std::uint64_t time = 0;
  std::uint64_t events = 0;
};

/// Single-threaded discrete-event network. Events run in (time, insertion
/// sequence) order; all randomness comes from the seed.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg);

  NodeId add_node(std::unique_ptr<NodeProgram> program);
  NodeProgram& node(NodeId id);
  std::size_t node_count() const { return nodes_.size(); }
  bool crashed(NodeId id) const;

  void send(NodeId from, NodeId to, Bytes payload);
  void inject_fault(const FaultDirective& d);
  /// Runs `fn` in the node's context at simulated time `at_ms`.
  void schedule(std::uint64_t at_ms, NodeId node, std::function<void(Context&)> fn);

  /// Names messages in the trace; defaults to "msg".
  void set_classifier(std::function<std::string(const Bytes&)> fn) { classify_ = std::move(fn); }

  /// Starts nodes not yet started, then processes events until `done`
  /// holds (checked after each event) or the next event lies past
  /// `time_limit_ms`.
  RunResult run_until(const std::function<bool()>& done, std::uint64_t time_limit_ms);
  RunResult run_for(std::uint64_t time_limit_ms) {
    return run_until([] { return false; }, time_limit_ms);
  }

  std::uint64_t now() const { return now_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  void write_trace(std::ostream& os) const;
  std::mt19937_64& node_rng(NodeId id);

 private:
  friend class Context;
  struct Deliver {
    NodeId from;
    NodeId to;
    std::shared_ptr<const Bytes> payload;
  };
  struct Fire {
    NodeId node;
    std::uint64_t timer_id;
  };
  struct Call {
    NodeId node;
    std::function<void(Context&)> fn;
  };
  struct Inject {
    FaultDirective directive;
  };
  struct Event {
    std::uint64_t time;
    std::uint64_t seq;
    std::variant<Deliver, Fire, Call, Inject> what;
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  struct Slot {
    std::unique_ptr<NodeProgram> program;
    std::mt19937_64 rng;
    bool started = false;
    bool crashed = false;
    std::uint64_t extra_delay = 0;
  };

  void check(NodeId id) const;
  void push(std::uint64_t time, decltype(Event::what) what);
  bool partitioned(NodeId a, NodeId b, std::uint64_t t) const;
  void enqueue_send(NodeId from, NodeId to, std::shared_ptr<const Bytes> payload);
  void record(TraceRecord::Kind kind, NodeId from, NodeId to, const Bytes* payload);
  void apply_fault(const FaultDirective& d);
  void process(Event& ev);

  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<Slot> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<TraceRecord> trace_;
  std::function<std::string(const Bytes&)> classify_;
};

}  // namespace aid::netsim
