#include "aid/netsim/simulator.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include "aid/crypto/keccak.hpp"

namespace aid::netsim {

void SimConfig::validate() const {
  if (latency_min > latency_max) throw std::invalid_argument("latency_min exceeds latency_max");
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw std::invalid_argument("drop_rate outside [0, 1]");
  for (const auto& p : partitions)
    if (p.start_ms > p.end_ms) throw std::invalid_argument("partition ends before it starts");
}

namespace {

std::uint64_t parse_u64(const std::string& s, const std::string& text) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("bad number in directive: " + text);
  return v;
}

}  // namespace

FaultDirective parse_directive(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) throw UnknownDirective(text);
  auto arity = [&](std::size_t n) {
    if (words.size() != n + 1) throw std::invalid_argument("wrong argument count in directive: " + text);
  };
  const auto& name = words[0];
  if (name == "crash") {
    arity(2);
    return Crash{parse_u64(words[1], text), parse_u64(words[2], text)};
  }
  if (name == "equivocate") {
    arity(1);
    return Equivocate{parse_u64(words[1], text)};
  }
  if (name == "delay") {
    arity(2);
    return DelayAll{parse_u64(words[1], text), parse_u64(words[2], text)};
  }
  throw UnknownDirective(name);
}

std::string to_string(const FaultDirective& d) {
  struct V {
    std::string operator()(const Crash& c) const {
      return "crash " + std::to_string(c.node) + " " + std::to_string(c.at_ms);
    }
    std::string operator()(const Equivocate& e) const { return "equivocate " + std::to_string(e.node); }
    std::string operator()(const DelayAll& x) const {
      return "delay " + std::to_string(x.node) + " " + std::to_string(x.extra_ms);
    }
  };
  return std::visit(V{}, d);
}

std::string_view to_string(TraceRecord::Kind k) {
  switch (k) {
    case TraceRecord::Kind::Deliver: return "deliver";
    case TraceRecord::Kind::Drop: return "drop";
    case TraceRecord::Kind::Timer: return "timer";
    case TraceRecord::Kind::Inject: return "inject";
    case TraceRecord::Kind::Limit: return "limit";
  }
  return "?";
}

std::string TraceRecord::to_line() const {
  std::string line = std::to_string(time);
  line += ' ';
  line += to_string(kind);
  line += ' ' + std::to_string(from) + ' ' + std::to_string(to) + ' ';
  line += message_type.empty() ? std::string("-") : message_type;
  line += ' ';
  line += message_hash.is_zero() ? std::string("-") : to_hex(message_hash.view());
  return line;
}

// ---- Context

std::uint64_t Context::now() const { return sim_.now_; }
void Context::send(NodeId to, Bytes payload) { sim_.send(self_, to, std::move(payload)); }
void Context::broadcast(const Bytes& payload) {
  auto shared = std::make_shared<const Bytes>(payload);
  for (NodeId to = 0; to < sim_.nodes_.size(); ++to)
    if (to != self_) sim_.enqueue_send(self_, to, shared);
}
void Context::set_timer(std::uint64_t delay_ms, std::uint64_t timer_id) {
  sim_.push(sim_.now_ + delay_ms, Simulator::Fire{self_, timer_id});
}
std::mt19937_64& Context::rng() { return sim_.nodes_[self_].rng; }
std::size_t Context::node_count() const { return sim_.nodes_.size(); }

// ---- Simulator

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) { cfg_.validate(); }

NodeId Simulator::add_node(std::unique_ptr<NodeProgram> program) {
  Slot slot;
  slot.program = std::move(program);
  const NodeId id = nodes_.size();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(id)};
  slot.rng.seed(seq);
  nodes_.push_back(std::move(slot));
  return id;
}

void Simulator::check(NodeId id) const {
  if (id >= nodes_.size()) throw UnknownNode(id);
}

NodeProgram& Simulator::node(NodeId id) {
  check(id);
  return *nodes_[id].program;
}

bool Simulator::crashed(NodeId id) const {
  check(id);
  return nodes_[id].crashed;
}

std::mt19937_64& Simulator::node_rng(NodeId id) {
  check(id);
  return nodes_[id].rng;
}

void Simulator::push(std::uint64_t time, decltype(Event::what) what) {
  queue_.push(Event{time, seq_++, std::move(what)});
}

bool Simulator::partitioned(NodeId a, NodeId b, std::uint64_t t) const {
  for (const auto& p : cfg_.partitions) {
    if (t < p.start_ms || t >= p.end_ms) continue;
    if ((p.a.count(a) && p.b.count(b)) || (p.b.count(a) && p.a.count(b))) return true;
  }
  return false;
}

void Simulator::send(NodeId from, NodeId to, Bytes payload) {
  check(from);
  check(to);
  enqueue_send(from, to, std::make_shared<const Bytes>(std::move(payload)));
}

void Simulator::enqueue_send(NodeId from, NodeId to, std::shared_ptr<const Bytes> payload) {
  if (nodes_[from].crashed) return;
  // Both draws happen for every send so one edge's outcome never shifts
  // the random sequence seen by later sends.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  const std::uint64_t span = cfg_.latency_max - cfg_.latency_min + 1;
  const std::uint64_t latency = cfg_.latency_min + (span == 0 ? rng_() : rng_() % span);
  if (u < cfg_.drop_rate || partitioned(from, to, now_)) {
    record(TraceRecord::Kind::Drop, from, to, payload.get());
    return;
  }
  push(now_ + latency + nodes_[from].extra_delay, Deliver{from, to, std::move(payload)});
}

void Simulator::record(TraceRecord::Kind kind, NodeId from, NodeId to, const Bytes* payload) {
  if (!cfg_.record_trace) return;
  TraceRecord r;
  r.time = now_;
  r.kind = kind;
  r.from = from;
  r.to = to;
  if (payload) {
    r.message_type = classify_ ? classify_(*payload) : "msg";
    r.message_hash = crypto::keccak256(*payload);
  }
  trace_.push_back(std::move(r));
}

void Simulator::inject_fault(const FaultDirective& d) {
  std::visit([this](const auto& x) { check(x.node); }, d);
  if (const auto* c = std::get_if<Crash>(&d); c && c->at_ms > now_) {
    push(c->at_ms, Inject{d});
    return;
  }
  apply_fault(d);
}

void Simulator::apply_fault(const FaultDirective& d) {
  NodeId target = 0;
  if (const auto* c = std::get_if<Crash>(&d)) {
    target = c->node;
    nodes_[target].crashed = true;
  } else if (const auto* e = std::get_if<Equivocate>(&d)) {
    target = e->node;
    nodes_[target].program->make_equivocator();
  } else {
    const auto& x = std::get<DelayAll>(d);
    target = x.node;
    nodes_[target].extra_delay += x.extra_ms;
  }
  if (cfg_.record_trace) {
    TraceRecord r;
    r.time = now_;
    r.kind = TraceRecord::Kind::Inject;
    r.from = r.to = target;
    r.message_type = to_string(d);
    for (auto& ch : r.message_type)
      if (ch == ' ') ch = ':';
    trace_.push_back(std::move(r));
  }
}

void Simulator::schedule(std::uint64_t at_ms, NodeId node, std::function<void(Context&)> fn) {
  check(node);
  push(std::max(at_ms, now_), Call{node, std::move(fn)});
}

void Simulator::process(Event& ev) {
  if (auto* d = std::get_if<Deliver>(&ev.what)) {
    auto& slot = nodes_[d->to];
    if (slot.crashed) return;
    record(TraceRecord::Kind::Deliver, d->from, d->to, d->payload.get());
    Context ctx(*this, d->to);
    slot.program->on_message(ctx, d->from, *d->payload);
  } else if (auto* f = std::get_if<Fire>(&ev.what)) {
    auto& slot = nodes_[f->node];
    if (slot.crashed) return;
    if (cfg_.record_trace) {
      TraceRecord r;
      r.time = now_;
      r.kind = TraceRecord::Kind::Timer;
      r.from = r.to = f->node;
      r.message_type = std::to_string(f->timer_id);
      trace_.push_back(std::move(r));
    }
    Context ctx(*this, f->node);
    slot.program->on_timer(ctx, f->timer_id);
  } else if (auto* c = std::get_if<Call>(&ev.what)) {
    if (nodes_[c->node].crashed) return;
    Context ctx(*this, c->node);
    c->fn(ctx);
  } else {
    apply_fault(std::get<Inject>(ev.what).directive);
  }
}

RunResult Simulator::run_until(const std::function<bool()>& done, std::uint64_t time_limit_ms) {
  RunResult res;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    auto& slot = nodes_[id];
    if (slot.started || slot.crashed) continue;
    slot.started = true;
    Context ctx(*this, id);
    slot.program->on_start(ctx);
  }
  if (done()) {
    res.reached = true;
    res.time = now_;
    return res;
  }
  while (!queue_.empty() && queue_.top().time <= time_limit_ms) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    process(ev);
    ++res.events;
    if (done()) {
      res.reached = true;
      res.time = now_;
      return res;
    }
  }
  now_ = std::max(now_, time_limit_ms);
  res.time = now_;
  if (cfg_.record_trace) {
    TraceRecord r;
    r.time = now_;
    r.kind = TraceRecord::Kind::Limit;
    trace_.push_back(std::move(r));
  }
  return res;
}

void Simulator::write_trace(std::ostream& os) const {
  for (const auto& r : trace_) os << r.to_line() << '\n';
}

}  // namespace aid::netsim
