#include "aid/ledger/state.hpp"

#include "aid/crypto/keccak.hpp"

namespace aid::ledger {

namespace {

bool enrolled(const AidState& s, const Address& who) {
  auto it = s.recipients.find(who);
  return it != s.recipients.end() && it->second;
}

Amount& org_balance(AidState& s) { return s.balances[s.organization]; }

// Guards are evaluated in the order the contract lists them, so the first
// failing condition names the error.
Receipt do_add_recipient(AidState& s, const Address& sender, const Address& recipient) {
  if (sender != s.organization) return Receipt::failure(ErrorCode::Unauthorized);
  s.recipients[recipient] = true;
  return Receipt{std::nullopt, {RecipientAdded{recipient}}};
}

Receipt do_remove_recipient(AidState& s, const Address& sender, const Address& recipient) {
  if (sender != s.organization) return Receipt::failure(ErrorCode::Unauthorized);
  s.recipients[recipient] = false;
  return Receipt{std::nullopt, {RecipientRemoved{recipient}}};
}

Receipt do_register_bank_account(AidState& s, const Address& sender, const Address& recipient, ByteView account) {
  if (sender != s.organization) return Receipt::failure(ErrorCode::Unauthorized);
  if (!enrolled(s, recipient)) return Receipt::failure(ErrorCode::NotRecipient);
  if (account.empty()) return Receipt::failure(ErrorCode::EmptyAccount);
  // Packed encoding of a lone dynamic byte string is the raw bytes.
  auto hash = crypto::keccak256(account);
  s.bank_accounts[recipient] = hash;
  return Receipt{std::nullopt, {BankAccountRegistered{recipient, hash}}};
}

Receipt do_add_funds(AidState& s, const Address& sender, Amount amount) {
  if (sender != s.organization) return Receipt::failure(ErrorCode::Unauthorized);
  auto next = get_balance(s, s.organization).checked_add(amount);
  if (!next) return Receipt::failure(ErrorCode::Overflow);
  org_balance(s) = *next;
  return Receipt{std::nullopt, {FundsAdded{amount}}};
}

Receipt do_send_allowance(AidState& s, const Address& sender, const Address& recipient, Amount amount) {
  if (sender != s.organization) return Receipt::failure(ErrorCode::Unauthorized);
  if (!enrolled(s, recipient)) return Receipt::failure(ErrorCode::NotRecipient);
  auto next = get_balance(s, s.organization).checked_sub(amount);
  if (!next) return Receipt::failure(ErrorCode::InsufficientFunds);
  // Value leaves the ledger toward the off-chain transfer; nothing is credited.
  org_balance(s) = *next;
  return Receipt{std::nullopt, {AllowanceSent{recipient, amount}}};
}

template <typename F>
Applied copy_apply(const AidState& state, F&& f) {
  Applied out{state, {}};
  out.receipt = f(out.state);
  if (!out.receipt.ok()) out.state = state;
  return out;
}

}  // namespace

AidState init(const Address& organization) {
  AidState s;
  s.organization = organization;
  s.balances[organization] = Amount(0);
  return s;
}

Receipt apply_in_place(AidState& s, const Address& sender, const TxPayload& payload) {
  struct Dispatch {
    AidState& s;
    const Address& sender;
    Receipt operator()(const AddRecipient& p) const { return do_add_recipient(s, sender, p.recipient); }
    Receipt operator()(const RemoveRecipient& p) const { return do_remove_recipient(s, sender, p.recipient); }
    Receipt operator()(const RegisterBankAccount& p) const {
      return do_register_bank_account(s, sender, p.recipient, p.account);
    }
    Receipt operator()(const AddFunds& p) const { return do_add_funds(s, sender, p.amount); }
    Receipt operator()(const SendAllowance& p) const { return do_send_allowance(s, sender, p.recipient, p.amount); }
  };
  return std::visit(Dispatch{s, sender}, payload);
}

Applied apply(const AidState& state, const Address& sender, const TxPayload& payload) {
  return copy_apply(state, [&](AidState& s) { return apply_in_place(s, sender, payload); });
}

Applied add_recipient(const AidState& state, const Address& sender, const Address& recipient) {
  return copy_apply(state, [&](AidState& s) { return do_add_recipient(s, sender, recipient); });
}

Applied remove_recipient(const AidState& state, const Address& sender, const Address& recipient) {
  return copy_apply(state, [&](AidState& s) { return do_remove_recipient(s, sender, recipient); });
}

Applied register_bank_account(const AidState& state, const Address& sender, const Address& recipient,
                              ByteView account) {
  return copy_apply(state, [&](AidState& s) { return do_register_bank_account(s, sender, recipient, account); });
}

Applied add_funds(const AidState& state, const Address& sender, Amount amount) {
  return copy_apply(state, [&](AidState& s) { return do_add_funds(s, sender, amount); });
}

Applied send_allowance(const AidState& state, const Address& sender, const Address& recipient, Amount amount) {
  return copy_apply(state, [&](AidState& s) { return do_send_allowance(s, sender, recipient, amount); });
}

Amount get_balance(const AidState& state, const Address& caller) {
  auto it = state.balances.find(caller);
  return it == state.balances.end() ? Amount(0) : it->second;
}

bool is_recipient(const AidState& state, const Address& who) { return enrolled(state, who); }

std::optional<AccountHash> bank_account(const AidState& state, const Address& who) {
  auto it = state.bank_accounts.find(who);
  if (it == state.bank_accounts.end()) return std::nullopt;
  return it->second;
}

Bytes serialize(const AidState& state) {
  Writer w;
  w.fixed(state.organization);
  w.u64(state.recipients.size());
  for (const auto& [addr, flag] : state.recipients) w.fixed(addr).u8(flag ? 1 : 0);
  w.u64(state.balances.size());
  for (const auto& [addr, amount] : state.balances) w.fixed(addr).amount(amount);
  w.u64(state.bank_accounts.size());
  for (const auto& [addr, hash] : state.bank_accounts) w.fixed(addr).fixed(hash);
  return std::move(w).take();
}

AidState deserialize_state(ByteView bytes) {
  Reader r(bytes);
  AidState s;
  s.organization = r.fixed<Address>();
  auto read_map = [&r](auto& map, auto read_value) {
    auto n = r.u64();
    std::optional<Address> prev;
    for (std::uint64_t i = 0; i < n; ++i) {
      auto addr = r.fixed<Address>();
      if (prev && !(*prev < addr)) throw DecodeError("mapping entries not strictly ascending");
      prev = addr;
      map.emplace(addr, read_value());
    }
  };
  read_map(s.recipients, [&r] {
    auto flag = r.u8();
    if (flag > 1) throw DecodeError("bad recipient flag");
    return flag == 1;
  });
  read_map(s.balances, [&r] { return r.amount(); });
  read_map(s.bank_accounts, [&r] { return r.fixed<Hash32>(); });
  r.finish();
  return s;
}

Hash32 state_root(const AidState& state) { return crypto::keccak256(serialize(state)); }

}  // namespace aid::ledger
