#pragma once

#include <map>

#include "aid/ledger/types.hpp"

namespace aid::ledger {

/// Replicated contract state. Mappings are ordered by address bytes so the
/// canonical serialization falls out of iteration order.
struct AidState {
  Address organization;
  std::map<Address, bool> recipients;
  std::map<Address, Amount> balances;
  std::map<Address, AccountHash> bank_accounts;

  friend bool operator==(const AidState&, const AidState&) = default;
};

struct Applied {
  AidState state;
  Receipt receipt;
};

AidState init(const Address& organization);

Applied apply(const AidState& state, const Address& sender, const TxPayload& payload);
/// In-place form of apply. On failure the state is left exactly as given.
Receipt apply_in_place(AidState& state, const Address& sender, const TxPayload& payload);

Applied add_recipient(const AidState& state, const Address& sender, const Address& recipient);
Applied remove_recipient(const AidState& state, const Address& sender, const Address& recipient);
Applied register_bank_account(const AidState& state, const Address& sender, const Address& recipient,
                              ByteView account);
Applied add_funds(const AidState& state, const Address& sender, Amount amount);
Applied send_allowance(const AidState& state, const Address& sender, const Address& recipient, Amount amount);

Amount get_balance(const AidState& state, const Address& caller);
bool is_recipient(const AidState& state, const Address& who);
std::optional<AccountHash> bank_account(const AidState& state, const Address& who);

/// organization, recipients, balances, bank_accounts; each mapping as a u64
/// count followed by entries ascending by address.
Bytes serialize(const AidState& state);
AidState deserialize_state(ByteView bytes);
Hash32 state_root(const AidState& state);

}  // namespace aid::ledger
