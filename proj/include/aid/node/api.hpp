#pragma once

#include <functional>
#include <map>
#include <string>

#include "aid/node/node_core.hpp"

namespace aid::node {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// JSON over HTTP. Reads come from the current View; POST /tx goes to
/// `submit`, which the host routes to the node's event loop.
class Api {
 public:
  using ViewFn = std::function<std::shared_ptr<const View>()>;
  using SubmitFn = std::function<SubmitResult(const ledger::Transaction&)>;

  Api(ViewFn view, SubmitFn submit) : view_(std::move(view)), submit_(std::move(submit)) {}

  HttpResponse handle(const HttpRequest& req) const;

 private:
  ViewFn view_;
  SubmitFn submit_;
};

/// JSON form of an event as served by /events, with its location.
struct EventRow {
  std::uint64_t height = 0;
  Hash32 tx_hash;
  std::uint32_t tx_index = 0;
  std::uint32_t event_index = 0;
  ledger::Event event;
};

std::string event_row_json(const EventRow& row);
std::vector<EventRow> collect_events(const View& v);

}  // namespace aid::node
