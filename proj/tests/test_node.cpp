#include <sys/stat.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <map>
#include <sstream>
#include <thread>

#include "aid/crypto/keccak.hpp"
#include "aid/node/api.hpp"
#include "aid/node/config.hpp"
#include "aid/node/runtime.hpp"
#include "doctest.h"
#include "solo_node.hpp"

using namespace aid;
using namespace aid::node;
using ledger::Transaction;
using nlohmann::json;
using testutil::seeded_key;
using testutil::SoloNode;
using testutil::TempDir;

namespace {

Bytes text(const std::string& s) { return Bytes(s.begin(), s.end()); }

Address addr(const std::string& seed) { return seeded_key(seed).address(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
}

ledger::LedgerState genesis_state(const crypto::KeyPair& org) {
  ledger::LedgerState s;
  s.aid = ledger::init(org.address());
  return s;
}

BankInstruction instr(std::uint64_t h, std::uint32_t idx, std::uint64_t amount) {
  BankInstruction b;
  b.block_height = h;
  b.tx_hash = crypto::keccak256(as_bytes("tx" + std::to_string(h)));
  b.event_index = idx;
  b.recipient = addr("r" + std::to_string(h));
  b.account_hash = crypto::keccak256(as_bytes("acct"));
  b.amount = Amount(amount);
  return b;
}

// enroll, register, fund, two sends
void scripted_payout(SoloNode& n, const Address& r) {
  REQUIRE_FALSE(n.send(n.org, ledger::AddRecipient{r}).error);
  REQUIRE_FALSE(n.send(n.org, ledger::RegisterBankAccount{r, text("IBAN-TEST-001")}).error);
  REQUIRE_FALSE(n.send(n.org, ledger::AddFunds{Amount(1000)}).error);
  REQUIRE_FALSE(n.send(n.org, ledger::SendAllowance{r, Amount(300)}).error);
  REQUIRE_FALSE(n.send(n.org, ledger::SendAllowance{r, Amount(200)}).error);
}

}  // namespace

TEST_CASE("genesis document round-trips and validates") {
  TempDir d;
  GenesisDoc g;
  g.chain_id = "aid-test";
  g.organization = addr("organization");
  g.validators = {addr("v0"), addr("v1"), addr("v2"), addr("v3")};
  g.strict_bank_account_mode = true;
  g.timestamp = 1234;
  g.save(d.str("genesis.json"));
  CHECK(GenesisDoc::load(d.str("genesis.json")) == g);
  CHECK(GenesisDoc::from_json(g.to_json()) == g);
  CHECK(g.head().height == 0);
  CHECK(g.head().state.aid.organization == g.organization);

  g.validators.push_back(g.validators[0]);
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.validators.clear();
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("mempool admission") {
  auto org = seeded_key("organization");
  auto other = seeded_key("someone");
  auto head = genesis_state(org);
  Mempool pool;

  auto t0 = Transaction::make(org, 0, ledger::AddFunds{Amount(5)});
  CHECK_FALSE(pool.admit(t0, head));
  CHECK(pool.admit(t0, head) == AdmitError::BadNonce);  // duplicate
  CHECK(pool.next_nonce(org.address(), head) == 1);

  // gap: nonce 2 while 1 is missing
  CHECK(pool.admit(Transaction::make(org, 2, ledger::AddFunds{Amount(1)}), head) == AdmitError::BadNonce);
  auto t1 = Transaction::make(org, 1, ledger::AddFunds{Amount(6)});
  CHECK_FALSE(pool.admit(t1, head));

  auto forged = Transaction::make(other, 0, ledger::AddFunds{Amount(1)});
  forged.sender = org.address();
  CHECK(pool.admit(forged, head) == AdmitError::BadSignature);

  auto big = Transaction::make(other, 0, ledger::RegisterBankAccount{org.address(), Bytes(kMaxAccountBytes + 1, 'x')});
  CHECK(pool.admit(big, head) == AdmitError::Malformed);

  // unauthorized payloads are still admitted; they fail on-chain
  auto t2 = Transaction::make(other, 0, ledger::AddFunds{Amount(1)});
  CHECK_FALSE(pool.admit(t2, head));
  CHECK(pool.size() == 3);
  CHECK(pool.contains(t1.hash()));

  auto taken = pool.take(head, 10);
  REQUIRE(taken.size() == 3);
  CHECK(taken[0] == t0);
  CHECK(taken[1] == t1);
  CHECK(taken[2] == t2);
  CHECK(pool.take(head, 2).size() == 2);

  auto after = head;
  after.nonces[org.address()] = 1;
  CHECK(pool.take(after, 10).size() == 2);
  pool.prune(after);
  CHECK(pool.size() == 2);
  CHECK_FALSE(pool.contains(t0.hash()));

  Mempool tiny(false, 1);
  CHECK_FALSE(tiny.admit(t0, head));
  CHECK(tiny.admit(t2, head) == AdmitError::MempoolFull);
}

TEST_CASE("strict mode rejects allowances to recipients without an account") {
  auto org = seeded_key("organization");
  auto r = addr("recipient");
  auto head = genesis_state(org);
  head.aid.recipients[r] = true;
  Mempool strict(true);
  Mempool lax(false);
  auto tx = Transaction::make(org, 0, ledger::SendAllowance{r, Amount(1)});
  CHECK(strict.admit(tx, head) == AdmitError::StrictModeNoAccount);
  CHECK_FALSE(lax.admit(tx, head));

  head.aid.bank_accounts[r] = crypto::keccak256(as_bytes("x"));
  CHECK_FALSE(strict.admit(tx, head));
}

TEST_CASE("chain store persists and reopens at the same head") {
  SoloNode n;
  n.open();
  auto r = addr("recipient");
  scripted_payout(n, r);
  CHECK(n.height() == 5);
  auto head = n.store->head();
  CHECK(ledger::get_balance(head.state.aid, n.org.address()) == Amount(500));

  n.close();
  n.open();
  CHECK(n.store->head().hash == head.hash);
  CHECK(n.store->head().state == head.state);
  CHECK(n.store->truncated_bytes() == 0);
  CHECK(n.store->blocks().size() == 6);
  CHECK(n.store->blocks()[0]->block == n.genesis.block());

  std::ostringstream dump;
  n.store->export_text(dump);
  CHECK(dump.str().find("SendAllowance") != std::string::npos);
  CHECK(dump.str().find("AllowanceSent") != std::string::npos);
}

TEST_CASE("chain store truncates a torn tail and keeps going") {
  SoloNode n;
  n.open();
  for (int i = 0; i < 3; ++i) REQUIRE_FALSE(n.send(n.org, ledger::AddFunds{Amount(10)}).error);
  auto h2 = n.store->blocks()[2]->hash;
  auto path = n.store->log_path();
  n.close();

  auto data = slurp(path);
  std::filesystem::resize_file(path, data.size() - 7);
  n.open();
  CHECK(n.height() == 2);
  CHECK(n.store->head().hash == h2);
  CHECK(n.store->truncated_bytes() > 0);

  REQUIRE_FALSE(n.send(n.org, ledger::AddFunds{Amount(10)}).error);
  CHECK(n.height() == 3);
  n.close();
  n.open();
  CHECK(n.height() == 3);
  CHECK(n.store->truncated_bytes() == 0);
  CHECK(ledger::get_balance(n.store->head().state.aid, n.org.address()) == Amount(30));
}

TEST_CASE("chain store refuses a corrupted frame") {
  SoloNode n;
  n.open();
  for (int i = 0; i < 2; ++i) REQUIRE_FALSE(n.send(n.org, ledger::AddFunds{Amount(10)}).error);
  auto path = n.store->log_path();
  n.close();

  auto data = slurp(path);
  data[10] = static_cast<char>(data[10] ^ 0x40);
  spit(path, data);
  try {
    n.open();
    FAIL("corruption not detected");
  } catch (const StorageError& e) {
    CHECK(e.kind == StorageError::Kind::ChecksumMismatch);
  }
}

TEST_CASE("replay checks linkage, roots and seals") {
  SoloNode n;
  n.open();
  for (int i = 0; i < 3; ++i) REQUIRE_FALSE(n.send(n.org, ledger::AddFunds{Amount(i + 1)}).error);
  std::vector<consensus::Block> blocks;
  for (std::size_t h = 1; h < n.store->blocks().size(); ++h) blocks.push_back(n.store->blocks()[h]->block);

  CHECK(replay(n.genesis, blocks) == n.store->head().state);
  CHECK(replay(n.genesis, {}) == n.genesis.head().state);

  auto kind_of = [&](std::vector<consensus::Block> bs) {
    try {
      replay(n.genesis, bs);
    } catch (const StorageError& e) {
      return std::string(to_string(e.kind));
    }
    return std::string("ok");
  };
  CHECK(kind_of({blocks[0], blocks[2]}) == "GapInChain");
  CHECK(kind_of({blocks[1]}) == "GapInChain");

  auto bad_root = blocks;
  bad_root[1].header.state_root.bytes[0] ^= 1;
  CHECK(kind_of(bad_root) == "HashMismatch");

  auto no_seals = blocks;
  no_seals[2].commit_seals.clear();
  CHECK(kind_of(no_seals) == "ValidationFailure");
}

TEST_CASE("random blocks match the reference model and survive restart") {
  SoloNode n;
  n.open();
  testutil::KeyedOps ops(7, 6, 1u << 20, n.org);
  oracle::Model model(ops.gen.pool[0]);
  std::vector<std::uint8_t> expected_events;

  for (int i = 0; i < 100; ++i) {
    auto op = ops.gen.next();
    int code = model.step(op);
    auto res = n.send(ops.key_of(op.sender), testutil::to_payload(op));
    REQUIRE_FALSE(res.error);
    REQUIRE(n.height() == static_cast<std::uint64_t>(i + 1));
    const auto& rc = n.store->blocks().back()->receipts.at(0);
    CHECK(static_cast<int>(rc.error ? static_cast<int>(*rc.error) : 0) == code);
  }
  CHECK(ledger::serialize(n.store->head().state.aid) == model.state_bytes());
  aid::Bytes events;
  for (std::size_t h = 1; h < n.store->blocks().size(); ++h)
    for (const auto& rc : n.store->blocks()[h]->receipts) {
      auto enc = testutil::encode_events(rc.events);
      events.insert(events.end(), enc.begin(), enc.end());
    }
  CHECK(events == model.event_log());

  auto head = n.store->head();
  n.close();
  n.open();
  CHECK(n.store->head().hash == head.hash);
  CHECK(n.store->head().state == head.state);
}

TEST_CASE("bank instruction json") {
  auto b = instr(4, 2, 77);
  CHECK(BankInstruction::from_json(b.to_json()) == b);
  CHECK_FALSE(b.manual_review());
  b.account_hash.reset();
  CHECK(b.manual_review());
  CHECK(json::parse(b.to_json())["manual_review"] == true);
  CHECK(BankInstruction::from_json(b.to_json()) == b);
}

TEST_CASE("file writer appends, dedups across reopen and ignores a torn line") {
  TempDir d;
  auto path = d.str("bank.jsonl");
  {
    FileWriter w(path);
    w.deliver(instr(1, 0, 10));
    w.deliver(instr(2, 0, 20));
    CHECK(w.delivered(instr(1, 0, 10).key()));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"block_height\": 3, \"tx_h";
  }
  FileWriter w(path);
  CHECK(w.delivered(instr(2, 0, 20).key()));
  CHECK_FALSE(w.delivered(instr(3, 0, 30).key()));
  auto all = FileWriter::read_all(path);
  REQUIRE(all.size() == 2);
  CHECK(all[1] == instr(2, 0, 20));
}

TEST_CASE("bank sink retries in order through an outage") {
  auto mem = std::make_unique<MemoryWriter>();
  auto* w = mem.get();
  w->fail_next(3);
  BankSink sink(std::move(mem), 1, 4);
  for (int i = 1; i <= 4; ++i) sink.emit(instr(i, 0, i * 10));
  REQUIRE(sink.flush(5'000));
  auto got = w->records();
  REQUIRE(got.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(got[i] == instr(i + 1, 0, (i + 1) * 10));
  CHECK(sink.failures() == 3);
  CHECK(sink.queued() == 0);

  // already delivered keys are skipped
  sink.emit(instr(2, 0, 20));
  REQUIRE(sink.flush(5'000));
  CHECK(w->records().size() == 4);
}

TEST_CASE("webhook writer posts, retries and journals") {
  TempDir d;
  httplib::Server srv;
  std::mutex mu;
  std::vector<std::string> bodies;
  int calls = 0;
  srv.Post("/bank", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lk(mu);
    if (calls++ == 0) {
      res.status = 503;
      return;
    }
    bodies.push_back(req.body);
    res.status = 200;
  });
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  auto url = "http://127.0.0.1:" + std::to_string(port) + "/bank";
  {
    BankSink sink(make_writer(url, d.str()), 1, 4);
    sink.emit(instr(1, 0, 5));
    REQUIRE(sink.flush(5'000));
    CHECK(sink.failures() == 1);
  }
  {
    std::lock_guard lk(mu);
    REQUIRE(bodies.size() == 1);
    CHECK(BankInstruction::from_json(bodies[0]) == instr(1, 0, 5));
  }
  WebhookWriter again(url, d.str("webhook.journal"));
  CHECK(again.delivered(instr(1, 0, 5).key()));
  srv.stop();
  t.join();

  WebhookWriter dead("http://127.0.0.1:" + std::to_string(port) + "/bank", d.str("j2"));
  CHECK_THROWS_AS(dead.deliver(instr(9, 0, 1)), SinkUnavailable);
}

TEST_CASE("node emits one instruction per allowance and none again after restart") {
  SoloNode n;
  auto path = n.dir.str("bank.jsonl");
  auto r = addr("recipient");
  {
    BankSink sink(std::make_unique<FileWriter>(path), 1, 4);
    n.open(&sink);
    scripted_payout(n, r);
    REQUIRE(sink.flush(5'000));
    n.close();
  }
  auto first = FileWriter::read_all(path);
  REQUIRE(first.size() == 2);
  CHECK(first[0].amount == Amount(300));
  CHECK(first[1].amount == Amount(200));
  CHECK(first[0].block_height == 4);
  CHECK(first[0].recipient == r);
  CHECK(first[0].account_hash == crypto::keccak256(as_bytes("IBAN-TEST-001")));

  {
    BankSink sink(std::make_unique<FileWriter>(path), 1, 4);
    n.open(&sink);
    REQUIRE(sink.flush(5'000));
    n.close();
  }
  CHECK(FileWriter::read_all(path) == first);

  // a sink file lost entirely is rebuilt from the chain
  std::filesystem::remove(path);
  {
    BankSink sink(std::make_unique<FileWriter>(path), 1, 4);
    n.open(&sink);
    REQUIRE(sink.flush(5'000));
    n.close();
  }
  CHECK(FileWriter::read_all(path) == first);
}

TEST_CASE("instructions without an account go to manual review") {
  BlockRecord rec;
  rec.block.header.height = 9;
  rec.tx_hashes = {crypto::keccak256(as_bytes("t"))};
  auto r = addr("recipient");
  rec.receipts = {ledger::Receipt{std::nullopt, {ledger::FundsAdded{Amount(5)}, ledger::AllowanceSent{r, Amount(3)}}}};
  ledger::AidState st = ledger::init(addr("organization"));
  auto out = instructions_for(rec, st);
  REQUIRE(out.size() == 1);
  CHECK(out[0].event_index == 1);
  CHECK(out[0].manual_review());
  st.bank_accounts[r] = crypto::keccak256(as_bytes("a"));
  CHECK_FALSE(instructions_for(rec, st)[0].manual_review());
}

namespace {

struct ApiHarness {
  SoloNode n;
  std::optional<Api> api;

  ApiHarness() {
    n.open();
    api.emplace([this] { return n.core->view(); },
                [this](const Transaction& tx) {
                  SubmitResult r;
                  n.now += 1000;
                  n.core->submit(tx, n.now, r);
                  return r;
                });
  }

  json get(const std::string& path, std::map<std::string, std::string> q = {}, int status = 200) {
    auto res = api->handle(HttpRequest{"GET", path, std::move(q), ""});
    CHECK_MESSAGE(res.status == status, path << " -> " << res.body);
    return json::parse(res.body);
  }
  std::pair<int, json> post_tx(const std::string& body) {
    auto res = api->handle(HttpRequest{"POST", "/tx", {}, body});
    return {res.status, json::parse(res.body)};
  }
};

}  // namespace

TEST_CASE("api serves state, blocks, transactions and errors") {
  ApiHarness h;
  auto r = addr("recipient");
  auto org = h.n.org.address();

  auto tx = Transaction::make(h.n.org, 0, ledger::AddRecipient{r});
  auto [st, body] = h.post_tx(to_hex(tx.encode()));
  CHECK(st == 202);
  CHECK(body["status"] == "accepted");
  CHECK(body["tx_hash"] == tx.hash().to_string());

  auto tx2 = Transaction::make(h.n.org, 1, ledger::RegisterBankAccount{r, text("IBAN-TEST-001")});
  std::tie(st, body) = h.post_tx(json{{"tx", "0x" + to_hex(tx2.encode())}}.dump());
  CHECK(st == 202);
  std::tie(st, body) = h.post_tx(json{{"tx", to_hex(tx2.encode())}}.dump());
  CHECK(st == 422);
  CHECK(body["error"] == "BadNonce");
  std::tie(st, body) = h.post_tx("zz");
  CHECK(st == 400);
  CHECK(body["error"] == "Malformed");
  std::tie(st, body) = h.post_tx("0102");
  CHECK(st == 400);

  REQUIRE_FALSE(h.n.send(h.n.org, ledger::AddFunds{Amount(1000)}).error);
  REQUIRE_FALSE(h.n.send(h.n.org, ledger::SendAllowance{r, Amount(300)}).error);
  REQUIRE_FALSE(h.n.send(h.n.org, ledger::SendAllowance{r, Amount(5000)}).error);  // fails on-chain

  auto head = h.get("/head");
  CHECK(head["height"] == 5);
  CHECK(head["chain_id"] == "aid-local");
  CHECK(head["hash"] == h.n.store->head().hash.to_string());
  CHECK(head["strict_bank_account_mode"] == false);

  CHECK(h.get("/balance/" + org.to_string())["balance"] == "700");
  CHECK(h.get("/balance/" + r.to_string())["balance"] == "0");

  auto rec = h.get("/recipient/" + r.to_string());
  CHECK(rec["enrolled"] == true);
  CHECK(rec["bank_account_registered"] == true);
  CHECK(rec["account_hash"] == crypto::keccak256(as_bytes("IBAN-TEST-001")).to_string());
  CHECK(h.get("/recipient/" + addr("nobody").to_string())["enrolled"] == false);

  auto acct = h.get("/account/" + org.to_string());
  CHECK(acct["nonce"] == 5);
  CHECK(acct["next_nonce"] == 5);

  auto aud = h.get("/audit/disbursed/" + r.to_string());
  CHECK(aud["disbursed"] == "300");
  CHECK(aud["count"] == 1);

  auto b2 = h.get("/block/2");
  CHECK(b2["height"] == 2);
  REQUIRE(b2["transactions"].size() == 1);
  CHECK(b2["transactions"][0]["hash"] == tx2.hash().to_string());
  CHECK(b2["transactions"][0]["payload"]["type"] == "RegisterBankAccount");
  CHECK(b2.dump().find("IBAN") == std::string::npos);
  CHECK(b2["commit_seals"].size() == 1);
  auto b5 = h.get("/block/5");
  CHECK(b5["transactions"][0]["receipt"]["status"] == "failure");
  CHECK(b5["transactions"][0]["receipt"]["error"] == "InsufficientFunds");
  CHECK(b5["transactions"][0]["receipt"]["error_code"] == 4);

  auto t = h.get("/tx/" + tx.hash().to_string());
  CHECK(t["state"] == "finalized");
  CHECK(t["height"] == 1);

  h.get("/block/99", {}, 404);
  h.get("/block/x", {}, 400);
  h.get("/balance/0x12", {}, 400);
  h.get("/tx/" + crypto::keccak256(as_bytes("none")).to_string(), {}, 404);
  h.get("/nope", {}, 404);
  auto err = h.get("/events", {{"type", "Bogus"}}, 400);
  CHECK(err["error"] == "BadRequest");
  h.get("/events", {{"colour", "1"}}, 400);
  CHECK(h.api->handle(HttpRequest{"DELETE", "/head", {}, ""}).status == 405);

  auto mp = h.get("/mempool");
  CHECK(mp["size"] == 0);
}

TEST_CASE("pending transactions show in mempool and tx lookups") {
  SoloNode n;
  for (int i = 0; i < 3; ++i) n.genesis.validators.push_back(addr("absent-" + std::to_string(i)));  // no quorum
  n.open();
  Api api([&] { return n.core->view(); }, [](const Transaction&) { return SubmitResult{}; });
  auto tx = Transaction::make(n.org, 0, ledger::AddFunds{Amount(1)});
  REQUIRE_FALSE(n.submit(tx).error);
  CHECK(n.height() == 0);
  auto res = api.handle({"GET", "/tx/" + tx.hash().to_string(), {}, ""});
  CHECK(json::parse(res.body)["state"] == "pending");
  auto mp = json::parse(api.handle({"GET", "/mempool", {}, ""}).body);
  CHECK(mp["size"] == 1);
  auto acct = json::parse(api.handle({"GET", "/account/" + n.org.address().to_string(), {}, ""}).body);
  CHECK(acct["nonce"] == 0);
  CHECK(acct["next_nonce"] == 1);
}

TEST_CASE("event queries match a linear scan") {
  ApiHarness h;
  testutil::KeyedOps ops(11, 5, 1000, h.n.org);
  for (int i = 0; i < 60; ++i) {
    auto op = ops.gen.next();
    REQUIRE_FALSE(h.n.send(ops.key_of(op.sender), testutil::to_payload(op)).error);
  }

  // oracle rows straight from stored receipts
  struct Row {
    std::uint64_t height;
    std::string type;
    std::string recipient;
    std::string tx_hash;
    std::uint32_t event_index;
  };
  std::vector<Row> all;
  for (const auto& rec : *h.n.core->view()->blocks)
    for (std::size_t i = 0; i < rec->receipts.size(); ++i)
      for (std::size_t e = 0; e < rec->receipts[i].events.size(); ++e) {
        const auto& ev = rec->receipts[i].events[e];
        auto rcp = ledger::event_recipient(ev);
        all.push_back({rec->block.header.height, std::string(ledger::event_name(ev)), rcp ? rcp->to_string() : "",
                       rec->tx_hashes[i].to_string(), static_cast<std::uint32_t>(e)});
      }
  REQUIRE(all.size() > 10);

  std::vector<std::map<std::string, std::string>> queries = {
      {},
      {{"limit", "10000"}},
      {{"type", "AllowanceSent"}, {"limit", "10000"}},
      {{"type", "FundsAdded"}, {"from_height", "10"}, {"to_height", "40"}, {"limit", "10000"}},
      {{"recipient", ops.gen.pool[2].empty() ? "" : testutil::to_address(ops.gen.pool[2]).to_string()},
       {"limit", "10000"}},
      {{"offset", "3"}, {"limit", "4"}},
      {{"type", "RecipientAdded"}, {"offset", "1"}, {"limit", "2"}},
      {{"from_height", "50"}, {"to_height", "20"}},
  };
  for (const auto& q : queries) {
    std::vector<Row> want;
    std::uint64_t from = 0, to = 1u << 30, offset = 0, limit = 100;
    std::string type, recipient;
    for (const auto& [k, v] : q) {
      if (k == "type") type = v;
      if (k == "recipient") recipient = v;
      if (k == "from_height") from = std::stoull(v);
      if (k == "to_height") to = std::stoull(v);
      if (k == "offset") offset = std::stoull(v);
      if (k == "limit") limit = std::stoull(v);
    }
    std::uint64_t total = 0;
    for (const auto& row : all) {
      if (row.height < from || row.height > to) continue;
      if (!type.empty() && row.type != type) continue;
      if (!recipient.empty() && row.recipient != recipient) continue;
      if (total >= offset && want.size() < limit) want.push_back(row);
      ++total;
    }
    auto got = h.get("/events", q);
    CHECK(got["total"] == total);
    REQUIRE(got["events"].size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto& g = got["events"][i];
      CHECK(g["height"] == want[i].height);
      CHECK(g["type"] == want[i].type);
      CHECK(g["tx_hash"] == want[i].tx_hash);
      CHECK(g["event_index"] == want[i].event_index);
      CHECK(g.value("recipient", std::string()) == want[i].recipient);
    }
  }
}

TEST_CASE("config from json, env overrides and key files") {
  TempDir d;
  auto cfg = NodeConfig::from_json(
      R"({"listen": "0.0.0.0:7100", "data_dir": "n0", "genesis": "../genesis.json", "key": "/abs/key.json",
          "bank_sink": "file:out/bank.jsonl", "peers": ["http://a:1"], "strict_bank_account_mode": true})",
      "/srv/aid/node0");
  CHECK(cfg.data_dir == "/srv/aid/node0/n0");
  CHECK(cfg.genesis_path == "/srv/aid/genesis.json");
  CHECK(cfg.key_path == "/abs/key.json");
  CHECK(cfg.bank_sink == "file:/srv/aid/node0/out/bank.jsonl");
  CHECK(cfg.strict_bank_account_mode == true);
  CHECK(cfg.port() == 7100);
  CHECK(cfg.host() == "0.0.0.0");

  auto back = NodeConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(NodeConfig::from_json(R"({"bank_sink": "http://h:9/x"})", "/b").bank_sink == "http://h:9/x");

  std::map<std::string, std::string> env = {{"AID_LISTEN", "127.0.0.1:7200"},
                                            {"AID_PEERS", "http://x:1,,http://y:2"},
                                            {"AID_STRICT_BANK_ACCOUNT_MODE", "false"},
                                            {"AID_BANK_SINK", "http://bank/hook"}};
  auto getenv = [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  cfg.apply_env(getenv);
  CHECK(cfg.port() == 7200);
  CHECK(cfg.peers == std::vector<std::string>{"http://x:1", "http://y:2"});
  CHECK(cfg.strict_bank_account_mode == false);
  CHECK(cfg.bank_sink == "http://bank/hook");
  CHECK(cfg.data_dir == "/srv/aid/node0/n0");
  env["AID_STRICT_BANK_ACCOUNT_MODE"] = "maybe";
  CHECK_THROWS(cfg.apply_env(getenv));

  spit(d.str("node.json"), R"({"listen": "127.0.0.1:7300", "data_dir": "x"})");
  env.erase("AID_STRICT_BANK_ACCOUNT_MODE");
  auto loaded = NodeConfig::load(d.str("node.json"), getenv);
  CHECK(loaded.port() == 7200);
  CHECK(loaded.data_dir == d.str("x"));

  auto k = seeded_key("node-key");
  save_key(d.str("key.json"), k);
  struct stat sb {};
  REQUIRE(::stat(d.str("key.json").c_str(), &sb) == 0);
  CHECK((sb.st_mode & 0777) == 0600);
  CHECK(load_key(d.str("key.json")).address() == k.address());

  auto j = json::parse(slurp(d.str("key.json")));
  j["address"] = addr("someone-else").to_string();
  spit(d.str("bad.json"), j.dump());
  CHECK_THROWS_AS(load_key(d.str("bad.json")), std::invalid_argument);
  CHECK_THROWS(load_key(d.str("missing.json")));
}

TEST_CASE("four runtimes over http finalize a transaction") {
  TempDir d;
  GenesisDoc g;
  g.organization = seeded_key("organization").address();
  std::vector<crypto::KeyPair> keys;
  for (int i = 0; i < 4; ++i) {
    keys.push_back(seeded_key("rt-validator-" + std::to_string(i)));
    g.validators.push_back(keys.back().address());
  }
  g.save(d.str("genesis.json"));

  std::vector<std::unique_ptr<NodeRuntime>> nodes;
  std::vector<std::string> urls;
  for (int i = 0; i < 4; ++i) {
    NodeConfig c;
    c.listen = "127.0.0.1:0";
    c.data_dir = d.str("node" + std::to_string(i));
    c.genesis_path = d.str("genesis.json");
    c.key_path = d.str("key" + std::to_string(i) + ".json");
    save_key(c.key_path, keys[i]);
    if (i == 0) c.bank_sink = d.str("bank.jsonl");
    nodes.push_back(std::make_unique<NodeRuntime>(c));
    nodes.back()->start();
    urls.push_back(nodes.back()->url());
  }
  for (auto& n : nodes) n->set_peers(urls);

  auto org = seeded_key("organization");
  auto r = addr("recipient");
  std::vector<ledger::TxPayload> script = {ledger::AddFunds{Amount(1000)}, ledger::AddRecipient{r},
                                           ledger::RegisterBankAccount{r, text("IBAN-TEST-001")},
                                           ledger::SendAllowance{r, Amount(300)}};
  for (std::size_t i = 0; i < script.size(); ++i) {
    auto res = nodes[i % 4]->submit(Transaction::make(org, i, script[i]));
    REQUIRE_FALSE(res.error);
    // wait for each so nonces arrive in order at every node
    REQUIRE(nodes[0]->wait_for([&](const View& v) { return v.head.state.next_nonce(org.address()) > i; }, 20'000));
  }
  for (auto& n : nodes)
    CHECK(n->wait_for(
        [&](const View& v) { return ledger::get_balance(v.head.state.aid, org.address()) == Amount(700); }, 20'000));

  httplib::Client cli("127.0.0.1", nodes[2]->port());
  auto res = cli.Get("/balance/" + org.address().to_string());
  REQUIRE(res);
  CHECK(json::parse(res->body)["balance"] == "700");

  REQUIRE(nodes[0]->flush_sink(5'000));
  auto bank = FileWriter::read_all(d.str("bank.jsonl"));
  REQUIRE(bank.size() == 1);
  CHECK(bank[0].amount == Amount(300));
  for (auto& n : nodes) CHECK_FALSE(n->halted());
  stop_all(nodes);
}
