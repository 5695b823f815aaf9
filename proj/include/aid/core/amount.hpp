#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aid {

using u128 = unsigned __int128;

/// Indivisible currency units in the unsigned 128-bit range. Arithmetic is
/// checked: results that leave the range come back as nullopt.
class Amount {
 public:
  constexpr Amount() = default;
  constexpr explicit Amount(u128 v) : value_(v) {}

  static constexpr Amount max() { return Amount(~u128{0}); }

  constexpr u128 value() const { return value_; }

  std::optional<Amount> checked_add(Amount other) const {
    u128 sum = value_ + other.value_;
    if (sum < value_) return std::nullopt;
    return Amount(sum);
  }
  std::optional<Amount> checked_sub(Amount other) const {
    if (other.value_ > value_) return std::nullopt;
    return Amount(value_ - other.value_);
  }

  std::string to_string() const;
  // Plain decimal digits only, no sign or separators.
  static std::optional<Amount> parse(std::string_view text);

  friend constexpr auto operator<=>(const Amount&, const Amount&) = default;

 private:
  u128 value_ = 0;
};

}  // namespace aid
