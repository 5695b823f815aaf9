#include "aid/cli/client.hpp"

#include <httplib.h>

namespace aid::cli {

using nlohmann::json;

namespace {

json parse_body(const httplib::Result& res) {
  auto j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw ApiError(res->status, "BadResponse", "node sent non-JSON body");
  return j;
}

json check(const httplib::Result& res, const std::string& what, const std::string& url) {
  if (!res) throw ConnectionError("cannot reach " + url + " (" + httplib::to_string(res.error()) + ")");
  auto j = parse_body(res);
  if (res->status >= 300) {
    std::string err = j.value("error", std::string("HttpError"));
    std::string msg = j.value("message", err);
    throw ApiError(res->status, err, what + ": " + msg);
  }
  return j;
}

}  // namespace

NodeClient::NodeClient(std::string url, int timeout_ms) : url_(std::move(url)) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
  http_ = std::make_unique<httplib::Client>(url_);
  if (!http_->is_valid()) throw ConnectionError("bad node url " + url_);
  http_->set_connection_timeout(std::chrono::milliseconds(timeout_ms));
  http_->set_read_timeout(std::chrono::milliseconds(timeout_ms));
}

NodeClient::~NodeClient() = default;
NodeClient::NodeClient(NodeClient&&) noexcept = default;

json NodeClient::get(const std::string& path, const std::map<std::string, std::string>& query) const {
  httplib::Params params(query.begin(), query.end());
  auto res = http_->Get(path, params, httplib::Headers{});
  return check(res, "GET " + path, url_);
}

json NodeClient::submit(const ledger::Transaction& tx) const {
  json body = {{"tx", "0x" + to_hex(tx.encode())}};
  auto res = http_->Post("/tx", body.dump(), "application/json");
  return check(res, "POST /tx", url_);
}

std::uint64_t NodeClient::next_nonce(const Address& a) const {
  return get("/account/" + a.to_string()).at("next_nonce").get<std::uint64_t>();
}

}  // namespace aid::cli
