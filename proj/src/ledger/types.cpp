#include "aid/ledger/types.hpp"

#include <array>

namespace aid::ledger {

namespace {

constexpr std::array<std::string_view, 5> error_names = {"Unauthorized", "NotRecipient", "EmptyAccount",
                                                         "InsufficientFunds", "Overflow"};
constexpr std::array<std::string_view, 5> payload_names = {"AddRecipient", "RemoveRecipient", "RegisterBankAccount",
                                                           "AddFunds", "SendAllowance"};
constexpr std::array<std::string_view, 5> event_names = {"RecipientAdded", "RecipientRemoved",
                                                         "BankAccountRegistered", "FundsAdded", "AllowanceSent"};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view to_string(ErrorCode code) { return error_names.at(static_cast<std::size_t>(code) - 1); }

std::optional<ErrorCode> error_from_string(std::string_view name) {
  for (std::size_t i = 0; i < error_names.size(); ++i)
    if (error_names[i] == name) return static_cast<ErrorCode>(i + 1);
  return std::nullopt;
}

std::optional<ErrorCode> error_from_int(int code) {
  if (code < 1 || code > static_cast<int>(error_names.size())) return std::nullopt;
  return static_cast<ErrorCode>(code);
}

std::string_view payload_name(const TxPayload& p) { return payload_names.at(p.index()); }
std::string_view event_name(const Event& e) { return event_names.at(e.index()); }

std::optional<std::size_t> event_index_from_name(std::string_view name) {
  for (std::size_t i = 0; i < event_names.size(); ++i)
    if (event_names[i] == name) return i;
  return std::nullopt;
}

std::optional<Address> event_recipient(const Event& e) {
  return std::visit(overloaded{
                        [](const FundsAdded&) -> std::optional<Address> { return std::nullopt; },
                        [](const auto& ev) -> std::optional<Address> { return ev.recipient; },
                    },
                    e);
}

void encode(Writer& w, const TxPayload& p) {
  w.u8(static_cast<std::uint8_t>(p.index() + 1));
  std::visit(overloaded{
                 [&](const AddRecipient& v) { w.fixed(v.recipient); },
                 [&](const RemoveRecipient& v) { w.fixed(v.recipient); },
                 [&](const RegisterBankAccount& v) { w.fixed(v.recipient).bytes(v.account); },
                 [&](const AddFunds& v) { w.amount(v.amount); },
                 [&](const SendAllowance& v) { w.fixed(v.recipient).amount(v.amount); },
             },
             p);
}

TxPayload decode_payload(Reader& r) {
  switch (r.u8()) {
    case 1:
      return AddRecipient{r.fixed<Address>()};
    case 2:
      return RemoveRecipient{r.fixed<Address>()};
    case 3: {
      auto who = r.fixed<Address>();
      return RegisterBankAccount{who, r.bytes()};
    }
    case 4:
      return AddFunds{r.amount()};
    case 5: {
      auto who = r.fixed<Address>();
      return SendAllowance{who, r.amount()};
    }
    default:
      throw DecodeError("unknown payload tag");
  }
}

void encode(Writer& w, const Event& e) {
  w.u8(static_cast<std::uint8_t>(e.index() + 1));
  std::visit(overloaded{
                 [&](const RecipientAdded& v) { w.fixed(v.recipient); },
                 [&](const RecipientRemoved& v) { w.fixed(v.recipient); },
                 [&](const BankAccountRegistered& v) { w.fixed(v.recipient).fixed(v.account_hash); },
                 [&](const FundsAdded& v) { w.amount(v.amount); },
                 [&](const AllowanceSent& v) { w.fixed(v.recipient).amount(v.amount); },
             },
             e);
}

Event decode_event(Reader& r) {
  switch (r.u8()) {
    case 1:
      return RecipientAdded{r.fixed<Address>()};
    case 2:
      return RecipientRemoved{r.fixed<Address>()};
    case 3: {
      auto who = r.fixed<Address>();
      return BankAccountRegistered{who, r.fixed<Hash32>()};
    }
    case 4:
      return FundsAdded{r.amount()};
    case 5: {
      auto who = r.fixed<Address>();
      return AllowanceSent{who, r.amount()};
    }
    default:
      throw DecodeError("unknown event tag");
  }
}

void encode(Writer& w, const Receipt& rc) {
  w.u8(rc.error ? static_cast<std::uint8_t>(*rc.error) : 0);
  w.u32(static_cast<std::uint32_t>(rc.events.size()));
  for (const auto& e : rc.events) encode(w, e);
}

Receipt decode_receipt(Reader& r) {
  Receipt rc;
  if (auto status = r.u8(); status != 0) {
    rc.error = error_from_int(status);
    if (!rc.error) throw DecodeError("unknown error code");
  }
  auto n = r.u32();
  if (n > r.remaining()) throw DecodeError("event count exceeds input");
  for (std::uint32_t i = 0; i < n; ++i) rc.events.push_back(decode_event(r));
  return rc;
}

}  // namespace aid::ledger
