#pragma once

#include <json.hpp>
#include <string>

#include "aid/core/amount.hpp"
#include "aid/core/bytes.hpp"

namespace aid::node {

Address json_address(const nlohmann::json& j);
std::string read_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_file(const std::string& path, const std::string& content, bool private_mode = false);

}  // namespace aid::node
