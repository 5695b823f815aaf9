#include "aid/node/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <stdexcept>

#include "aid/node/json_util.hpp"

namespace aid::node {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute() || p.rfind("http://", 0) == 0) return p;
  if (p.rfind("file:", 0) == 0) return "file:" + resolve(p.substr(5), base);
  return (fs::path(base) / p).lexically_normal().string();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    auto item = s.substr(start, comma - start);
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: " + s);
}

}  // namespace

std::string NodeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["listen"] = listen;
  if (!advertise.empty()) j["advertise"] = advertise;
  j["data_dir"] = data_dir;
  j["genesis"] = genesis_path;
  j["key"] = key_path;
  if (strict_bank_account_mode) j["strict_bank_account_mode"] = *strict_bank_account_mode;
  j["bank_sink"] = bank_sink;
  j["peers"] = peers;
  j["base_timeout_ms"] = base_timeout_ms;
  j["empty_blocks"] = empty_blocks;
  return j.dump(2) + "\n";
}

NodeConfig NodeConfig::from_json(const std::string& text, const std::string& base_dir) {
  auto j = nlohmann::json::parse(text);
  NodeConfig c;
  c.listen = j.value("listen", c.listen);
  c.advertise = j.value("advertise", std::string());
  c.data_dir = resolve(j.value("data_dir", c.data_dir), base_dir);
  c.genesis_path = resolve(j.value("genesis", c.genesis_path), base_dir);
  c.key_path = resolve(j.value("key", std::string()), base_dir);
  if (j.contains("strict_bank_account_mode")) c.strict_bank_account_mode = j["strict_bank_account_mode"].get<bool>();
  c.bank_sink = resolve(j.value("bank_sink", std::string()), base_dir);
  c.peers = j.value("peers", std::vector<std::string>{});
  c.base_timeout_ms = j.value("base_timeout_ms", c.base_timeout_ms);
  c.empty_blocks = j.value("empty_blocks", false);
  return c;
}

void NodeConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    const char* v = getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("AID_LISTEN")) listen = *v;
  if (auto v = get("AID_ADVERTISE")) advertise = *v;
  if (auto v = get("AID_DATA_DIR")) data_dir = *v;
  if (auto v = get("AID_GENESIS")) genesis_path = *v;
  if (auto v = get("AID_KEY")) key_path = *v;
  if (auto v = get("AID_STRICT_BANK_ACCOUNT_MODE")) strict_bank_account_mode = parse_bool(*v);
  if (auto v = get("AID_BANK_SINK")) bank_sink = *v;
  if (auto v = get("AID_PEERS")) peers = split_list(*v);
}

NodeConfig NodeConfig::load(const std::string& path, const std::function<const char*(const char*)>& getenv) {
  NodeConfig c;
  if (!path.empty()) c = from_json(read_file(path), fs::path(path).parent_path().string());
  c.apply_env(getenv ? getenv : [](const char* n) -> const char* { return std::getenv(n); });
  return c;
}

std::string NodeConfig::host() const {
  auto colon = listen.rfind(':');
  return colon == std::string::npos ? listen : listen.substr(0, colon);
}

int NodeConfig::port() const {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("listen address needs a port: " + listen);
  return std::stoi(listen.substr(colon + 1));
}

void save_key(const std::string& path, const crypto::KeyPair& key) {
  nlohmann::ordered_json j;
  j["secret"] = "0x" + to_hex(key.secret.view());
  j["address"] = key.address().to_string();
  write_file(path, j.dump(2) + "\n", true);
}

crypto::KeyPair load_key(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  auto raw = from_hex(j.at("secret").get<std::string>());
  if (!raw || raw->size() != 32) throw std::invalid_argument("key file " + path + ": bad secret");
  auto key = crypto::KeyPair::from_secret(*crypto::SecretKey::from_span(*raw));
  if (j.contains("address") && json_address(j["address"]) != key.address())
    throw std::invalid_argument("key file " + path + ": address does not match secret");
  return key;
}

}  // namespace aid::node
