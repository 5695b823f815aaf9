#include "reference_model.hpp"

#include <algorithm>

#include "keccak_reference.hpp"

namespace oracle {

namespace {

template <typename V>
V* lookup(std::vector<std::pair<Addr, V>>& v, const Addr& a) {
  for (auto& e : v)
    if (e.first == a) return &e.second;
  return nullptr;
}

template <typename V>
void put(std::vector<std::pair<Addr, V>>& v, const Addr& a, V value) {
  if (auto* p = lookup(v, a)) {
    *p = value;
    return;
  }
  v.emplace_back(a, value);
}

void push_be(std::vector<std::uint8_t>& out, U128 v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void push(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& b) { out.insert(out.end(), b.begin(), b.end()); }

template <typename V, typename F>
void dump(std::vector<std::uint8_t>& out, std::vector<std::pair<Addr, V>> entries, F value_bytes) {
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  push_be(out, entries.size(), 8);
  for (const auto& [a, v] : entries) {
    push(out, a);
    value_bytes(v);
  }
}

}  // namespace

Model::Model(Addr org) : org_(std::move(org)) { balances_.emplace_back(org_, 0); }

U128 Model::balance_of(const Addr& a) const {
  for (const auto& e : balances_)
    if (e.first == a) return e.second;
  return 0;
}

int Model::step(const Op& op) {
  const bool is_org = op.sender == org_;
  bool* flag = lookup(recipients_, op.recipient);
  const bool enrolled = flag != nullptr && *flag;
  U128 org_bal = balance_of(org_);

  switch (op.kind) {
    case 1:
      if (!is_org) return 1;
      put(recipients_, op.recipient, true);
      events_.push_back(1);
      push(events_, op.recipient);
      return 0;
    case 2:
      if (!is_org) return 1;
      put(recipients_, op.recipient, false);
      events_.push_back(2);
      push(events_, op.recipient);
      return 0;
    case 3: {
      if (!is_org) return 1;
      if (!enrolled) return 2;
      if (op.account.empty()) return 3;
      auto h = keccak256(op.account);
      put(accounts_, op.recipient, h);
      events_.push_back(3);
      push(events_, op.recipient);
      push(events_, h);
      return 0;
    }
    case 4:
      if (!is_org) return 1;
      if (org_bal + op.amount < org_bal) return 5;
      put(balances_, org_, org_bal + op.amount);
      events_.push_back(4);
      push_be(events_, op.amount, 16);
      return 0;
    case 5:
      if (!is_org) return 1;
      if (!enrolled) return 2;
      if (org_bal < op.amount) return 4;
      put(balances_, org_, org_bal - op.amount);
      events_.push_back(5);
      push(events_, op.recipient);
      push_be(events_, op.amount, 16);
      return 0;
  }
  return -1;
}

std::vector<std::uint8_t> Model::state_bytes() const {
  std::vector<std::uint8_t> out;
  push(out, org_);
  dump(out, recipients_, [&](bool f) { out.push_back(f ? 1 : 0); });
  dump(out, balances_, [&](U128 v) { push_be(out, v, 16); });
  dump(out, accounts_, [&](const std::vector<std::uint8_t>& h) { push(out, h); });
  return out;
}

OpGenerator::OpGenerator(std::uint64_t seed, int pool_size, U128 max_amount_) : rng(seed), max_amount(max_amount_) {
  for (int i = 0; i < pool_size; ++i) {
    Addr a(20);
    for (auto& b : a) b = static_cast<std::uint8_t>(rng());
    pool.push_back(a);
  }
}

Op OpGenerator::next() {
  Op op;
  op.kind = 1 + static_cast<int>(rng() % 5);
  // organization sends most of the time so guarded paths get exercised
  op.sender = (rng() % 4 != 0) ? pool[0] : pool[rng() % pool.size()];
  op.recipient = pool[rng() % pool.size()];
  op.account.resize(rng() % 6);
  for (auto& b : op.account) b = static_cast<std::uint8_t>('0' + rng() % 10);
  op.amount = static_cast<U128>(rng() % (static_cast<std::uint64_t>(max_amount) + 1));
  return op;
}

}  // namespace oracle
