#include "aid/core/amount.hpp"

#include <algorithm>

namespace aid {

std::string Amount::to_string() const {
  if (value_ == 0) return "0";
  std::string out;
  for (u128 v = value_; v != 0; v /= 10) out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<Amount> Amount::parse(std::string_view text) {
  if (text.empty() || text.size() > 39) return std::nullopt;
  u128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    u128 digit = static_cast<u128>(c - '0');
    if (v > (~u128{0} - digit) / 10) return std::nullopt;
    v = v * 10 + digit;
  }
  return Amount(v);
}

}  // namespace aid
