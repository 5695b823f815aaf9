#include "aid/cli/commands.hpp"

#include <chrono>
#include <iostream>
#include <thread>

#include "aid/crypto/keccak.hpp"

namespace aid::cli {

using nlohmann::json;

Bytes account_bytes(const std::string& plaintext) {
  if (plaintext.empty()) return {};
  auto h = crypto::keccak256(as_bytes(plaintext));
  return Bytes(h.bytes.begin(), h.bytes.end());
}

Address parse_address(const std::string& text) {
  auto a = Address::parse(text);
  if (!a) throw CliError(kUsage, "not an address: '" + text + "'");
  return *a;
}

Amount parse_amount(const std::string& text) {
  auto a = Amount::parse(text);
  if (!a) throw CliError(kUsage, "not an amount: '" + text + "'");
  return *a;
}

ledger::TxPayload build_payload(const std::string& command, const std::vector<std::string>& args) {
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw CliError(kUsage, command + " takes " + std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
  };
  if (command == "add-recipient") {
    need(1);
    return ledger::AddRecipient{parse_address(args[0])};
  }
  if (command == "remove-recipient") {
    need(1);
    return ledger::RemoveRecipient{parse_address(args[0])};
  }
  if (command == "register-account") {
    need(2);
    return ledger::RegisterBankAccount{parse_address(args[0]), account_bytes(args[1])};
  }
  if (command == "add-funds") {
    need(1);
    return ledger::AddFunds{parse_amount(args[0])};
  }
  if (command == "send-allowance") {
    need(2);
    return ledger::SendAllowance{parse_address(args[0]), parse_amount(args[1])};
  }
  throw CliError(kUsage, "unknown org command " + command);
}

namespace {

std::string events_text(const json& receipt) {
  std::string s;
  for (const auto& e : receipt.value("events", json::array())) {
    if (!s.empty()) s += ", ";
    s += e.value("type", "?");
    if (e.contains("amount")) s += "(" + e["amount"].get<std::string>() + ")";
  }
  return s.empty() ? "no events" : s;
}

}  // namespace

int submit_payload(const NodeClient& node, const crypto::KeyPair& key, const ledger::TxPayload& payload,
                   const SubmitOptions& opts, Output& o) {
  const std::string name(ledger::payload_name(payload));
  const auto nonce = node.next_nonce(key.address());
  const auto tx = ledger::Transaction::make(key, nonce, payload);
  node.submit(tx);
  const auto hash = tx.hash().to_string();

  json result = {{"type", name}, {"tx_hash", hash}, {"nonce", nonce}, {"status", "submitted"}};
  if (!opts.wait) {
    if (o.json)
      o.out << result.dump() << "\n";
    else
      o.out << name << " submitted: " << hash << " (nonce " << nonce << ")\n";
    return kOk;
  }

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(opts.wait_timeout_ms);
  json found;
  while (true) {
    try {
      auto j = node.get("/tx/" + hash);
      if (j.value("state", "") == "finalized") {
        found = std::move(j);
        break;
      }
    } catch (const ApiError& e) {
      if (e.status != 404) throw;
    }
    if (std::chrono::steady_clock::now() > deadline)
      throw CliError(kApplication, name + " " + hash + " not finalized within " +
                                       std::to_string(opts.wait_timeout_ms) + " ms");
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }

  const auto& rc = found["receipt"];
  const bool ok = rc.value("status", "") == "success";
  result["status"] = ok ? "finalized" : "failed";
  result["height"] = found["height"];
  result["receipt"] = rc;
  if (o.json) {
    o.out << result.dump() << "\n";
  } else if (ok) {
    o.out << name << " finalized at height " << found["height"] << ": " << events_text(rc) << "\n"
          << "  tx " << hash << "\n";
  } else {
    o.err << name << " failed at height " << found["height"] << ": " << rc["error"].get<std::string>() << "\n"
          << "  tx " << hash << "\n";
  }
  return ok ? kOk : kReceiptBase + rc.value("error_code", 0);
}

int query_balance(const NodeClient& node, const Address& a, Output& o) {
  auto j = node.get("/balance/" + a.to_string());
  if (o.json)
    o.out << j.dump() << "\n";
  else
    o.out << j["balance"].get<std::string>() << "\n";
  return kOk;
}

int query_recipient(const NodeClient& node, const Address& a, Output& o) {
  auto j = node.get("/recipient/" + a.to_string());
  if (o.json) {
    o.out << j.dump() << "\n";
    return kOk;
  }
  o.out << "address:      " << j["address"].get<std::string>() << "\n"
        << "enrolled:     " << (j["enrolled"].get<bool>() ? "yes" : "no") << "\n"
        << "bank account: "
        << (j["bank_account_registered"].get<bool>() ? j["account_hash"].get<std::string>() : std::string("none"))
        << "\n";
  return kOk;
}

int query_events(const NodeClient& node, const std::map<std::string, std::string>& filters, Output& o) {
  auto j = node.get("/events", filters);
  if (o.json) {
    o.out << j.dump() << "\n";
    return kOk;
  }
  for (const auto& e : j["events"]) {
    o.out << e["height"] << "  " << e["type"].get<std::string>();
    if (e.contains("recipient")) o.out << "  " << e["recipient"].get<std::string>();
    if (e.contains("amount")) o.out << "  " << e["amount"].get<std::string>();
    if (e.contains("account_hash")) o.out << "  " << e["account_hash"].get<std::string>();
    o.out << "  tx " << e["tx_hash"].get<std::string>() << "\n";
  }
  o.out << j["events"].size() << " of " << j["total"] << " events\n";
  return kOk;
}

namespace {

std::vector<AuditRow> audit_rows_to(const NodeClient& node, std::uint64_t height) {
  std::vector<AuditRow> rows;
  Amount added, disbursed;
  std::uint64_t total = 1;
  while (rows.size() < total) {
    auto j = node.get("/events", {{"to_height", std::to_string(height)},
                                  {"offset", std::to_string(rows.size())},
                                  {"limit", "10000"}});
    total = j["total"].get<std::uint64_t>();
    if (j["events"].empty()) break;
    for (const auto& e : j["events"]) {
      AuditRow r;
      r.height = e["height"].get<std::uint64_t>();
      r.tx_hash = e["tx_hash"].get<std::string>();
      r.event_index = e["event_index"].get<std::uint32_t>();
      r.type = e["type"].get<std::string>();
      r.recipient = e.value("recipient", "");
      r.amount = e.value("amount", "");
      if (r.type == "FundsAdded" || r.type == "AllowanceSent") {
        auto amt = parse_amount(r.amount);
        auto& acc = r.type == "FundsAdded" ? added : disbursed;
        auto next = acc.checked_add(amt);
        if (!next) throw CliError(kApplication, "running total overflows at height " + std::to_string(r.height));
        acc = *next;
      }
      auto bal = added.checked_sub(disbursed);
      if (!bal) throw CliError(kApplication, "more disbursed than added at height " + std::to_string(r.height));
      r.added = added;
      r.disbursed = disbursed;
      r.org_balance = *bal;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace

std::vector<AuditRow> audit_rows(const NodeClient& node) {
  return audit_rows_to(node, node.get("/head")["height"].get<std::uint64_t>());
}

int audit_export(const NodeClient& node, std::ostream& dest, bool as_json, Output& o) {
  // Events and balance must describe the same head; retry if a block
  // lands in between.
  for (int attempt = 0; attempt < 5; ++attempt) {
    auto head = node.get("/head");
    const auto h = head["height"].get<std::uint64_t>();
    const auto org = head["organization"].get<std::string>();
    auto rows = audit_rows_to(node, h);
    auto bal = node.get("/balance/" + org);
    if (bal["height"].get<std::uint64_t>() != h) continue;

    if (!as_json) dest << "height,tx_hash,event_index,type,recipient,amount,total_added,total_disbursed,org_balance\n";
    for (const auto& r : rows) {
      if (as_json) {
        json j = {{"height", r.height},           {"tx_hash", r.tx_hash},
                  {"event_index", r.event_index}, {"type", r.type},
                  {"recipient", r.recipient},     {"amount", r.amount},
                  {"total_added", r.added.to_string()}, {"total_disbursed", r.disbursed.to_string()},
                  {"org_balance", r.org_balance.to_string()}};
        dest << j.dump() << "\n";
      } else {
        dest << r.height << "," << r.tx_hash << "," << r.event_index << "," << r.type << "," << r.recipient << ","
             << r.amount << "," << r.added.to_string() << "," << r.disbursed.to_string() << ","
             << r.org_balance.to_string() << "\n";
      }
    }
    dest.flush();
    const std::string expect = rows.empty() ? "0" : rows.back().org_balance.to_string();
    const std::string actual = bal["balance"].get<std::string>();
    if (expect != actual) {
      o.err << "conservation check FAILED at height " << h << ": added - disbursed = " << expect
            << ", organization balance = " << actual << "\n";
      return kApplication;
    }
    o.err << "conservation ok at height " << h << ": " << rows.size() << " events, organization balance " << actual
          << "\n";
    return kOk;
  }
  throw CliError(kApplication, "chain kept moving during audit export; try again");
}

int report(const std::exception_ptr& ep, Output& o) {
  int code = kApplication;
  std::string kind, msg;
  try {
    std::rethrow_exception(ep);
  } catch (const CliError& e) {
    code = e.code;
    kind = code == kUsage ? "UsageError" : "Error";
    msg = e.what();
  } catch (const ConnectionError& e) {
    code = kConnection;
    kind = "ConnectionError";
    msg = e.what();
  } catch (const ApiError& e) {
    kind = e.error;
    msg = e.what();
  } catch (const std::exception& e) {
    kind = "Error";
    msg = e.what();
  }
  if (o.json) o.out << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
  o.err << "error: " << kind << ": " << msg << "\n";
  return code;
}

}  // namespace aid::cli
