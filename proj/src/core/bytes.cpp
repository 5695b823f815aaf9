#include "aid/core/bytes.hpp"

namespace aid {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

template <typename T>
std::optional<T> parse_prefixed(std::string_view text) {
  if (text.size() != 2 + 2 * T::size || text.substr(0, 2) != "0x") return std::nullopt;
  auto raw = from_hex(text);
  if (!raw) return std::nullopt;
  auto fixed = T::from_span(*raw);
  if (!fixed) return std::nullopt;
  return T(*fixed);
}

}  // namespace

std::string to_hex(ByteView bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
  if (text.size() % 2 != 0) return std::nullopt;
  Bytes out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(text[2 * i]);
    int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::optional<Address> Address::parse(std::string_view text) { return parse_prefixed<Address>(text); }
std::optional<Hash32> Hash32::parse(std::string_view text) { return parse_prefixed<Hash32>(text); }

}  // namespace aid
