#include "aid/node/json_util.hpp"

#include <sys/stat.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aid::node {

Address json_address(const nlohmann::json& j) {
  auto a = Address::parse(j.get<std::string>());
  if (!a) throw std::invalid_argument("not an address: " + j.get<std::string>());
  return *a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content, bool private_mode) {
  auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (private_mode) ::chmod(tmp.c_str(), 0600);
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + path);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace aid::node
