#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aid/cli/client.hpp"
#include "aid/crypto/identity.hpp"
#include "aid/ledger/types.hpp"

namespace aid::cli {

/// Process exit codes. A transaction that finalizes with a failed receipt
/// exits with kReceiptBase + the ledger error code (11..15).
enum Exit : int { kOk = 0, kUsage = 1, kConnection = 2, kApplication = 3, kReceiptBase = 10 };

/// Error carrying the exit code it maps to.
struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

/// What a bank account identifier becomes before it leaves the process:
/// keccak-256 of the text, or nothing at all for the empty string (so the
/// ledger's empty-account guard still fires).
Bytes account_bytes(const std::string& plaintext);

/// Payload for an org subcommand ("add-recipient", ...) from its
/// positional arguments. Throws CliError(kUsage).
ledger::TxPayload build_payload(const std::string& command, const std::vector<std::string>& args);

Address parse_address(const std::string& text);
Amount parse_amount(const std::string& text);

struct Output {
  std::ostream& out;
  std::ostream& err;
  bool json = false;
};

struct SubmitOptions {
  bool wait = false;
  std::uint64_t wait_timeout_ms = 30'000;
};

/// Signs with the node-supplied nonce, submits, and with `wait` polls
/// until finalized. Returns the exit code; prints hash and receipt.
int submit_payload(const NodeClient& node, const crypto::KeyPair& key, const ledger::TxPayload& payload,
                   const SubmitOptions& opts, Output& o);

int query_balance(const NodeClient& node, const Address& a, Output& o);
int query_recipient(const NodeClient& node, const Address& a, Output& o);
int query_events(const NodeClient& node, const std::map<std::string, std::string>& filters, Output& o);

/// One row of the audit export: an event plus running totals.
struct AuditRow {
  std::uint64_t height = 0;
  std::string tx_hash;
  std::uint32_t event_index = 0;
  std::string type;
  std::string recipient;
  std::string amount;
  Amount added;
  Amount disbursed;
  Amount org_balance;  // added - disbursed
};

/// Pages through every event and accumulates running totals.
std::vector<AuditRow> audit_rows(const NodeClient& node);
/// Writes CSV (or JSON lines with `json`) and checks the final running
/// balance against the node's reported organization balance.
int audit_export(const NodeClient& node, std::ostream& dest, bool json, Output& o);

/// Maps an exception from a command to its exit code, printing it.
int report(const std::exception_ptr& e, Output& o);

}  // namespace aid::cli
