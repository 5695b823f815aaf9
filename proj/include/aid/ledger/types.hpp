#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "aid/core/amount.hpp"
#include "aid/core/bytes.hpp"
#include "aid/core/codec.hpp"

namespace aid::ledger {

/// Closed set of guard failures. The integer values are part of the API.
enum class ErrorCode : std::uint8_t {
  Unauthorized = 1,
  NotRecipient = 2,
  EmptyAccount = 3,
  InsufficientFunds = 4,
  Overflow = 5,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_from_string(std::string_view name);
std::optional<ErrorCode> error_from_int(int code);

struct AddRecipient {
  Address recipient;
  friend bool operator==(const AddRecipient&, const AddRecipient&) = default;
};
struct RemoveRecipient {
  Address recipient;
  friend bool operator==(const RemoveRecipient&, const RemoveRecipient&) = default;
};
struct RegisterBankAccount {
  Address recipient;
  Bytes account;
  friend bool operator==(const RegisterBankAccount&, const RegisterBankAccount&) = default;
};
struct AddFunds {
  Amount amount;
  friend bool operator==(const AddFunds&, const AddFunds&) = default;
};
struct SendAllowance {
  Address recipient;
  Amount amount;
  friend bool operator==(const SendAllowance&, const SendAllowance&) = default;
};

using TxPayload = std::variant<AddRecipient, RemoveRecipient, RegisterBankAccount, AddFunds, SendAllowance>;

struct RecipientAdded {
  Address recipient;
  friend bool operator==(const RecipientAdded&, const RecipientAdded&) = default;
};
struct RecipientRemoved {
  Address recipient;
  friend bool operator==(const RecipientRemoved&, const RecipientRemoved&) = default;
};
struct BankAccountRegistered {
  Address recipient;
  AccountHash account_hash;
  friend bool operator==(const BankAccountRegistered&, const BankAccountRegistered&) = default;
};
struct FundsAdded {
  Amount amount;
  friend bool operator==(const FundsAdded&, const FundsAdded&) = default;
};
struct AllowanceSent {
  Address recipient;
  Amount amount;
  friend bool operator==(const AllowanceSent&, const AllowanceSent&) = default;
};

using Event = std::variant<RecipientAdded, RecipientRemoved, BankAccountRegistered, FundsAdded, AllowanceSent>;

std::string_view payload_name(const TxPayload& p);
std::string_view event_name(const Event& e);
std::optional<std::size_t> event_index_from_name(std::string_view name);
/// Recipient the event concerns; FundsAdded has none.
std::optional<Address> event_recipient(const Event& e);

/// Outcome of one applied payload. A failure carries no events and leaves
/// the state untouched.
struct Receipt {
  std::optional<ErrorCode> error;
  std::vector<Event> events;

  bool ok() const { return !error.has_value(); }
  static Receipt failure(ErrorCode code) { return Receipt{code, {}}; }

  friend bool operator==(const Receipt&, const Receipt&) = default;
};

// Canonical encodings: a one-byte variant tag (1-based, declaration order)
// followed by the fields in declaration order.
void encode(Writer& w, const TxPayload& p);
TxPayload decode_payload(Reader& r);
void encode(Writer& w, const Event& e);
Event decode_event(Reader& r);
void encode(Writer& w, const Receipt& rc);
Receipt decode_receipt(Reader& r);

}  // namespace aid::ledger
