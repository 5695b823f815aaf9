#include "aid/node/genesis.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aid/node/json_util.hpp"

namespace aid::node {

void GenesisDoc::validate() const {
  if (validators.empty()) throw std::invalid_argument("genesis lists no validators");
  std::set<Address> seen(validators.begin(), validators.end());
  if (seen.size() != validators.size()) throw std::invalid_argument("genesis lists a validator twice");
}

std::string GenesisDoc::to_json() const {
  nlohmann::ordered_json j;
  j["chain_id"] = chain_id;
  j["organization"] = organization.to_string();
  j["validators"] = nlohmann::json::array();
  for (const auto& v : validators) j["validators"].push_back(v.to_string());
  j["strict_bank_account_mode"] = strict_bank_account_mode;
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

GenesisDoc GenesisDoc::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  GenesisDoc g;
  g.chain_id = j.at("chain_id").get<std::string>();
  g.organization = json_address(j.at("organization"));
  for (const auto& v : j.at("validators")) g.validators.push_back(json_address(v));
  g.strict_bank_account_mode = j.value("strict_bank_account_mode", false);
  g.timestamp = j.value("timestamp", std::uint64_t{0});
  g.validate();
  return g;
}

GenesisDoc GenesisDoc::load(const std::string& path) { return from_json(read_file(path)); }

void GenesisDoc::save(const std::string& path) const { write_file(path, to_json()); }

}  // namespace aid::node
