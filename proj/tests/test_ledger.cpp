#include <random>

#include "aid/crypto/keccak.hpp"
#include "aid/ledger/state.hpp"
#include "doctest.h"
#include "ledger_bridge.hpp"
#include "reference_model.hpp"

using namespace aid;
using namespace aid::ledger;

namespace {

Address addr(std::uint8_t tag) {
  Address a;
  a.bytes.fill(tag);
  return a;
}

const Address org = addr(0x0a);
const Address rec = addr(0x0b);
const Address stranger = addr(0x0c);

Bytes text(std::string_view s) { return Bytes(s.begin(), s.end()); }

AidState funded_with_recipient(Amount funds) {
  auto s = init(org);
  s = add_funds(s, org, funds).state;
  return add_recipient(s, org, rec).state;
}

}  // namespace

TEST_CASE("init") {
  auto s = init(org);
  CHECK(s.organization == org);
  CHECK(get_balance(s, org) == Amount(0));
  CHECK_FALSE(is_recipient(s, stranger));
  CHECK_FALSE(is_recipient(s, org));
  CHECK(serialize(init(org)) == serialize(s));
}

TEST_CASE("apply dispatch") {
  auto s = init(org);
  auto ok = apply(s, org, AddFunds{Amount(1000)});
  CHECK(ok.receipt.ok());
  CHECK(get_balance(ok.state, org) == Amount(1000));
  CHECK(ok.receipt.events == std::vector<Event>{FundsAdded{Amount(1000)}});

  auto bad = apply(s, stranger, AddFunds{Amount(1000)});
  CHECK(bad.receipt.error == ErrorCode::Unauthorized);
  CHECK(bad.receipt.events.empty());
  CHECK(serialize(bad.state) == serialize(s));
}

TEST_CASE("add_recipient") {
  auto s = init(org);
  auto r1 = add_recipient(s, org, rec);
  CHECK(is_recipient(r1.state, rec));
  CHECK(r1.receipt.events == std::vector<Event>{RecipientAdded{rec}});

  CHECK(add_recipient(s, rec, rec).receipt.error == ErrorCode::Unauthorized);

  auto r2 = add_recipient(r1.state, org, rec);
  CHECK(r2.receipt.ok());
  CHECK(r2.state == r1.state);
  CHECK(r2.receipt.events == std::vector<Event>{RecipientAdded{rec}});
}

TEST_CASE("remove_recipient") {
  auto s = add_recipient(init(org), org, rec).state;
  auto removed = remove_recipient(s, org, rec);
  CHECK_FALSE(is_recipient(removed.state, rec));
  CHECK(removed.receipt.events == std::vector<Event>{RecipientRemoved{rec}});

  auto never = remove_recipient(init(org), org, stranger);
  CHECK(never.receipt.ok());
  CHECK(never.state.recipients.at(stranger) == false);

  CHECK(remove_recipient(s, stranger, rec).receipt.error == ErrorCode::Unauthorized);
}

TEST_CASE("register_bank_account") {
  auto s = add_recipient(init(org), org, rec).state;

  CHECK(register_bank_account(s, org, rec, {}).receipt.error == ErrorCode::EmptyAccount);

  auto r = register_bank_account(s, org, rec, text("abc"));
  REQUIRE(r.receipt.ok());
  CHECK(to_hex(bank_account(r.state, rec)->view()) ==
        "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
  CHECK(r.receipt.events == std::vector<Event>{BankAccountRegistered{rec, *bank_account(r.state, rec)}});

  auto x = register_bank_account(s, org, stranger, text("acct"));
  CHECK(x.receipt.error == ErrorCode::NotRecipient);
  CHECK(serialize(x.state) == serialize(s));

  SUBCASE("re-registration overwrites") {
    auto again = register_bank_account(r.state, org, rec, text("other"));
    CHECK(*bank_account(again.state, rec) == crypto::keccak256(as_bytes("other")));
  }

  SUBCASE("guard order: unauthorized before not-recipient before empty") {
    CHECK(register_bank_account(init(org), stranger, stranger, {}).receipt.error == ErrorCode::Unauthorized);
    CHECK(register_bank_account(init(org), org, stranger, {}).receipt.error == ErrorCode::NotRecipient);
  }

  SUBCASE("removal keeps the hash and re-enrollment restores eligibility") {
    auto gone = remove_recipient(r.state, org, rec).state;
    CHECK(bank_account(gone, rec));
    auto back = add_recipient(gone, org, rec).state;
    CHECK(bank_account(back, rec) == bank_account(r.state, rec));
  }
}

TEST_CASE("add_funds") {
  auto s = init(org);
  auto r = add_funds(s, org, Amount(1000));
  CHECK(get_balance(r.state, org) == Amount(1000));
  CHECK(r.receipt.events == std::vector<Event>{FundsAdded{Amount(1000)}});

  auto zero = add_funds(s, org, Amount(0));
  CHECK(zero.receipt.ok());
  CHECK(get_balance(zero.state, org) == Amount(0));
  CHECK(zero.receipt.events == std::vector<Event>{FundsAdded{Amount(0)}});

  auto full = add_funds(s, org, Amount::max());
  REQUIRE(full.receipt.ok());
  auto over = add_funds(full.state, org, Amount(1));
  CHECK(over.receipt.error == ErrorCode::Overflow);
  CHECK(over.receipt.events.empty());
  CHECK(serialize(over.state) == serialize(full.state));
}

TEST_CASE("send_allowance") {
  auto s = funded_with_recipient(Amount(1000));
  auto r = send_allowance(s, org, rec, Amount(300));
  CHECK(get_balance(r.state, org) == Amount(700));
  CHECK(r.receipt.events == std::vector<Event>{AllowanceSent{rec, Amount(300)}});
  CHECK(get_balance(r.state, rec) == Amount(0));

  auto poor = funded_with_recipient(Amount(100));
  CHECK(send_allowance(poor, org, rec, Amount(300)).receipt.error == ErrorCode::InsufficientFunds);
  CHECK(send_allowance(s, org, stranger, Amount(10)).receipt.error == ErrorCode::NotRecipient);
  CHECK(send_allowance(s, stranger, rec, Amount(10)).receipt.error == ErrorCode::Unauthorized);

  SUBCASE("exact balance drains to zero") {
    auto all = send_allowance(s, org, rec, Amount(1000));
    CHECK(all.receipt.ok());
    CHECK(get_balance(all.state, org) == Amount(0));
  }
  SUBCASE("no bank account is required") {
    CHECK_FALSE(bank_account(s, rec));
    CHECK(send_allowance(s, org, rec, Amount(1)).receipt.ok());
  }
}

TEST_CASE("get_balance defaults to zero") {
  CHECK(get_balance(init(org), org) == Amount(0));
  CHECK(get_balance(init(org), stranger) == Amount(0));
  auto s = send_allowance(funded_with_recipient(Amount(1000)), org, rec, Amount(300)).state;
  CHECK(get_balance(s, org) == Amount(700));
}

TEST_CASE("authorization completeness over every payload variant") {
  auto s = funded_with_recipient(Amount(1000));
  std::vector<TxPayload> payloads{AddRecipient{rec}, RemoveRecipient{rec}, RegisterBankAccount{rec, text("x")},
                                  AddFunds{Amount(1)}, SendAllowance{rec, Amount(1)}};
  for (const auto& sender : {rec, stranger, addr(0)}) {
    for (const auto& p : payloads) {
      auto r = apply(s, sender, p);
      CHECK(r.receipt.error == ErrorCode::Unauthorized);
      CHECK(serialize(r.state) == serialize(s));
    }
  }
}

TEST_CASE("canonical serialization layout") {
  auto s = add_recipient(init(org), org, rec).state;
  Bytes b = serialize(s);
  // org(20) | 1 recipient (8 + 21) | 1 balance (8 + 36) | 0 accounts (8)
  CHECK(b.size() == 20 + 8 + 21 + 8 + 36 + 8);
  CHECK(std::equal(org.bytes.begin(), org.bytes.end(), b.begin()));
  CHECK(b[27] == 1);
  CHECK(deserialize_state(b) == s);
  b.push_back(0);
  CHECK_THROWS_AS(deserialize_state(b), DecodeError);
}

TEST_CASE("invariants over random sequences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    oracle::OpGenerator gen(seed, 8, oracle::U128{1} << 20);
    oracle::Model model(gen.pool[0]);
    auto s = init(testutil::to_address(gen.pool[0]));
    std::vector<Event> log;
    u128 added = 0, sent = 0;

    for (int i = 0; i < 1000; ++i) {
      auto op = gen.next();
      auto before = serialize(s);
      auto payload = testutil::to_payload(op);
      const Address sender = testutil::to_address(op.sender);
      auto r = apply(s, sender, payload);

      if (!r.receipt.ok()) {
        CHECK(r.receipt.events.empty());
        CHECK(serialize(r.state) == before);
      }
      for (const auto& e : r.receipt.events) {
        if (auto* f = std::get_if<FundsAdded>(&e)) added += f->amount.value();
        if (auto* a = std::get_if<AllowanceSent>(&e)) {
          CHECK(is_recipient(s, a->recipient));
          CHECK(get_balance(s, s.organization) >= a->amount);
          sent += a->amount.value();
        }
      }
      int expected = model.step(op);
      CHECK(expected == (r.receipt.ok() ? 0 : static_cast<int>(*r.receipt.error)));
      log.insert(log.end(), r.receipt.events.begin(), r.receipt.events.end());
      s = std::move(r.state);
      CHECK(get_balance(s, s.organization).value() == added - sent);
    }
    CHECK(serialize(s) == model.state_bytes());
    CHECK(testutil::encode_events(log) == model.event_log());
  }
}

TEST_CASE("determinism: same sequence, byte-identical states") {
  auto run = [] {
    oracle::OpGenerator gen(42, 6, 5000);
    auto s = init(testutil::to_address(gen.pool[0]));
    for (int i = 0; i < 500; ++i) {
      auto op = gen.next();
      s = apply(s, testutil::to_address(op.sender), testutil::to_payload(op)).state;
    }
    return serialize(s);
  };
  CHECK(run() == run());
}

TEST_CASE("payload and receipt encodings decode back") {
  oracle::OpGenerator gen(3, 5, oracle::U128{1} << 100);
  for (int i = 0; i < 300; ++i) {
    auto p = testutil::to_payload(gen.next());
    Writer w;
    encode(w, p);
    Reader r(w.data());
    CHECK(decode_payload(r) == p);
    CHECK_NOTHROW(r.finish());
  }
  Receipt rc{std::nullopt, {FundsAdded{Amount(4)}, AllowanceSent{rec, Amount(9)}}};
  Writer w;
  encode(w, rc);
  Reader r(w.data());
  CHECK(decode_receipt(r) == rc);

  Bytes bad{9};
  Reader rb(bad);
  CHECK_THROWS_AS(decode_payload(rb), DecodeError);
}
