#pragma once

#include <json.hpp>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "aid/ledger/transaction.hpp"

namespace httplib {
class Client;
}

namespace aid::cli {

/// Node not reachable or the exchange broke off.
struct ConnectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The node answered with a non-success status.
struct ApiError : std::runtime_error {
  ApiError(int status, std::string error, const std::string& message)
      : std::runtime_error(message), status(status), error(std::move(error)) {}
  int status;
  std::string error;  // e.g. "NotFound", "BadNonce"
};

/// Thin JSON client for one node's HTTP API.
class NodeClient {
 public:
  explicit NodeClient(std::string url, int timeout_ms = 10'000);
  ~NodeClient();
  NodeClient(NodeClient&&) noexcept;

  nlohmann::json get(const std::string& path, const std::map<std::string, std::string>& query = {}) const;
  /// Returns the node's JSON answer; admission rejection throws ApiError
  /// with the rejection name.
  nlohmann::json submit(const ledger::Transaction& tx) const;

  std::uint64_t next_nonce(const Address& a) const;
  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::unique_ptr<httplib::Client> http_;
};

}  // namespace aid::cli
