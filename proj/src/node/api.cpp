#include "aid/node/api.hpp"

#include <charconv>
#include <json.hpp>

namespace aid::node {

using json = nlohmann::ordered_json;

namespace {

HttpResponse reply(int status, const json& j) { return {status, j.dump()}; }

HttpResponse error(int status, std::string_view code, const std::string& message) {
  json j;
  j["error"] = code;
  j["message"] = message;
  return reply(status, j);
}

HttpResponse bad_request(const std::string& m) { return error(400, "BadRequest", m); }
HttpResponse not_found(const std::string& m) { return error(404, "NotFound", m); }

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 1;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string::npos) slash = path.size();
    if (slash > start) out.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

json event_fields(const ledger::Event& e) {
  json j;
  j["type"] = ledger::event_name(e);
  if (auto r = ledger::event_recipient(e)) j["recipient"] = r->to_string();
  if (const auto* f = std::get_if<ledger::FundsAdded>(&e)) j["amount"] = f->amount.to_string();
  if (const auto* a = std::get_if<ledger::AllowanceSent>(&e)) j["amount"] = a->amount.to_string();
  if (const auto* b = std::get_if<ledger::BankAccountRegistered>(&e)) j["account_hash"] = b->account_hash.to_string();
  return j;
}

json row_json(const EventRow& row) {
  json j;
  j["height"] = row.height;
  j["tx_hash"] = row.tx_hash.to_string();
  j["tx_index"] = row.tx_index;
  j["event_index"] = row.event_index;
  const json fields = event_fields(row.event);
  for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
  return j;
}

json receipt_json(const ledger::Receipt& rc) {
  json j;
  j["status"] = rc.ok() ? "success" : "failure";
  j["error"] = rc.ok() ? json() : json(ledger::to_string(*rc.error));
  j["error_code"] = rc.ok() ? json(0) : json(static_cast<int>(*rc.error));
  j["events"] = json::array();
  for (const auto& e : rc.events) j["events"].push_back(event_fields(e));
  return j;
}

json payload_json(const ledger::TxPayload& p) {
  json j;
  j["type"] = ledger::payload_name(p);
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ledger::AddFunds>) {
          j["amount"] = v.amount.to_string();
        } else {
          j["recipient"] = v.recipient.to_string();
          if constexpr (std::is_same_v<T, ledger::SendAllowance>) j["amount"] = v.amount.to_string();
          // the account identifier itself is never echoed
          if constexpr (std::is_same_v<T, ledger::RegisterBankAccount>) j["account_bytes"] = v.account.size();
        }
      },
      p);
  return j;
}

json tx_json(const ledger::Transaction& tx, const Hash32& hash) {
  json j;
  j["hash"] = hash.to_string();
  j["sender"] = tx.sender.to_string();
  j["nonce"] = tx.nonce;
  j["payload"] = payload_json(tx.payload);
  return j;
}

std::optional<Address> address_arg(const std::string& s) { return Address::parse(s); }

}  // namespace

std::string event_row_json(const EventRow& row) { return row_json(row).dump(); }

std::vector<EventRow> collect_events(const View& v) {
  std::vector<EventRow> out;
  for (const auto& rec : *v.blocks) {
    for (std::size_t i = 0; i < rec->receipts.size(); ++i) {
      const auto& evs = rec->receipts[i].events;
      for (std::size_t e = 0; e < evs.size(); ++e)
        out.push_back(EventRow{rec->block.header.height, rec->tx_hashes[i], static_cast<std::uint32_t>(i),
                               static_cast<std::uint32_t>(e), evs[e]});
    }
  }
  return out;
}

HttpResponse Api::handle(const HttpRequest& req) const {
  const auto parts = split_path(req.path);
  if (parts.empty()) return not_found("no such endpoint");
  const auto v = view_();
  const auto& state = v->head.state.aid;
  const std::uint64_t height = v->head.height;

  try {
    if (req.method == "POST") {
      if (parts.size() == 1 && parts[0] == "tx") {
        std::string hex = req.body;
        if (!hex.empty() && hex.front() == '{') {
          auto j = nlohmann::json::parse(hex, nullptr, false);
          if (j.is_discarded() || !j.contains("tx") || !j["tx"].is_string()) return bad_request("expected {\"tx\": hex}");
          hex = j["tx"].get<std::string>();
        }
        while (!hex.empty() && (hex.back() == '\n' || hex.back() == ' ' || hex.back() == '\r')) hex.pop_back();
        auto raw = from_hex(hex);
        if (!raw) return error(400, "Malformed", "transaction is not hex");
        ledger::Transaction tx;
        try {
          tx = ledger::Transaction::decode(*raw);
        } catch (const std::exception& e) {
          return error(400, "Malformed", e.what());
        }
        auto res = submit_(tx);
        json j;
        j["tx_hash"] = res.tx_hash.to_string();
        j["status"] = res.error ? "rejected" : "accepted";
        if (res.error) {
          j["error"] = to_string(*res.error);
          return reply(422, j);
        }
        return reply(202, j);
      }
      return not_found("no such endpoint");
    }
    if (req.method != "GET") return error(405, "MethodNotAllowed", req.method);

    const auto& ep = parts[0];
    if (ep == "head" && parts.size() == 1) {
      json j;
      j["chain_id"] = v->chain_id;
      j["organization"] = state.organization.to_string();
      j["height"] = height;
      j["hash"] = v->head.hash.to_string();
      j["state_root"] = (*v->blocks)[height]->block.header.state_root.to_string();
      j["timestamp"] = v->head.timestamp;
      j["round"] = v->round;
      j["strict_bank_account_mode"] = v->strict_bank_account_mode;
      return reply(200, j);
    }
    if (ep == "balance" && parts.size() == 2) {
      auto a = address_arg(parts[1]);
      if (!a) return bad_request("bad address");
      json j;
      j["address"] = a->to_string();
      j["balance"] = ledger::get_balance(state, *a).to_string();
      j["height"] = height;
      return reply(200, j);
    }
    if (ep == "recipient" && parts.size() == 2) {
      auto a = address_arg(parts[1]);
      if (!a) return bad_request("bad address");
      auto acct = ledger::bank_account(state, *a);
      json j;
      j["address"] = a->to_string();
      j["enrolled"] = ledger::is_recipient(state, *a);
      j["bank_account_registered"] = acct.has_value();
      j["account_hash"] = acct ? json(acct->to_string()) : json();
      j["height"] = height;
      return reply(200, j);
    }
    if (ep == "account" && parts.size() == 2) {
      auto a = address_arg(parts[1]);
      if (!a) return bad_request("bad address");
      json j;
      j["address"] = a->to_string();
      j["nonce"] = v->head.state.next_nonce(*a);
      j["next_nonce"] = v->next_nonce(*a);
      j["height"] = height;
      return reply(200, j);
    }
    if (ep == "audit" && parts.size() == 3 && parts[1] == "disbursed") {
      auto a = address_arg(parts[2]);
      if (!a) return bad_request("bad address");
      Amount total;
      std::uint64_t count = 0;
      for (const auto& row : collect_events(*v)) {
        const auto* s = std::get_if<ledger::AllowanceSent>(&row.event);
        if (!s || s->recipient != *a) continue;
        auto next = total.checked_add(s->amount);
        if (!next) return error(500, "Overflow", "disbursed total overflows");
        total = *next;
        ++count;
      }
      json j;
      j["address"] = a->to_string();
      j["disbursed"] = total.to_string();
      j["count"] = count;
      j["height"] = height;
      return reply(200, j);
    }
    if (ep == "events" && parts.size() == 1) {
      std::optional<std::size_t> type;
      std::optional<Address> recipient;
      std::uint64_t from = 0, to = height, offset = 0, limit = 100;
      for (const auto& [k, val] : req.query) {
        if (val.empty()) continue;
        if (k == "type") {
          type = ledger::event_index_from_name(val);
          if (!type) return bad_request("unknown event type " + val);
        } else if (k == "recipient") {
          recipient = address_arg(val);
          if (!recipient) return bad_request("bad recipient");
        } else {
          auto n = parse_u64(val);
          if (!n) return bad_request("bad number for " + k);
          if (k == "from_height") from = *n;
          else if (k == "to_height") to = *n;
          else if (k == "offset") offset = *n;
          else if (k == "limit") limit = std::min<std::uint64_t>(*n, 10'000);
          else return bad_request("unknown parameter " + k);
        }
      }
      json rows = json::array();
      std::uint64_t total = 0;
      for (const auto& row : collect_events(*v)) {
        if (row.height < from || row.height > to) continue;
        if (type && row.event.index() != *type) continue;
        if (recipient && ledger::event_recipient(row.event) != recipient) continue;
        if (total >= offset && rows.size() < limit) rows.push_back(row_json(row));
        ++total;
      }
      json j;
      j["height"] = height;
      j["total"] = total;
      j["offset"] = offset;
      j["limit"] = limit;
      j["events"] = std::move(rows);
      return reply(200, j);
    }
    if (ep == "block" && parts.size() == 2) {
      auto h = parse_u64(parts[1]);
      if (!h) return bad_request("bad height");
      if (*h >= v->blocks->size()) return not_found("no block at height " + parts[1]);
      const auto& rec = *(*v->blocks)[*h];
      const auto& hd = rec.block.header;
      json j;
      j["height"] = hd.height;
      j["hash"] = rec.hash.to_string();
      j["parent_hash"] = hd.parent_hash.to_string();
      j["tx_root"] = hd.tx_root.to_string();
      j["state_root"] = hd.state_root.to_string();
      j["proposer"] = hd.proposer.to_string();
      j["round"] = hd.round;
      j["timestamp"] = hd.timestamp;
      j["transactions"] = json::array();
      for (std::size_t i = 0; i < rec.block.transactions.size(); ++i) {
        auto t = tx_json(rec.block.transactions[i], rec.tx_hashes[i]);
        t["receipt"] = receipt_json(rec.receipts[i]);
        j["transactions"].push_back(std::move(t));
      }
      j["commit_seals"] = json::array();
      for (const auto& s : rec.block.commit_seals) {
        json sj;
        sj["validator"] = s.validator.to_string();
        sj["round"] = s.round;
        j["commit_seals"].push_back(std::move(sj));
      }
      return reply(200, j);
    }
    if (ep == "tx" && parts.size() == 2) {
      auto h = Hash32::parse(parts[1]);
      if (!h) return bad_request("bad transaction hash");
      for (const auto& rec : *v->blocks) {
        for (std::size_t i = 0; i < rec->tx_hashes.size(); ++i) {
          if (rec->tx_hashes[i] != *h) continue;
          auto j = tx_json(rec->block.transactions[i], *h);
          j["state"] = "finalized";
          j["height"] = rec->block.header.height;
          j["index"] = i;
          j["receipt"] = receipt_json(rec->receipts[i]);
          return reply(200, j);
        }
      }
      for (const auto& tx : v->mempool) {
        if (tx.hash() != *h) continue;
        auto j = tx_json(tx, *h);
        j["state"] = "pending";
        return reply(200, j);
      }
      return not_found("unknown transaction");
    }
    if (ep == "mempool" && parts.size() == 1) {
      json j;
      j["height"] = height;
      j["size"] = v->mempool.size();
      j["transactions"] = json::array();
      for (const auto& tx : v->mempool) j["transactions"].push_back(tx_json(tx, tx.hash()));
      return reply(200, j);
    }
  } catch (const std::exception& e) {
    return error(500, "Internal", e.what());
  }
  return not_found("no such endpoint");
}

}  // namespace aid::node
