#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aid {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);
// Accepts an optional "0x" prefix; either case. Odd length or non-hex -> nullopt.
std::optional<Bytes> from_hex(std::string_view text);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Fixed-width opaque byte string. The tag keeps addresses and digests from
/// being mixed up even though both are plain byte arrays.
template <std::size_t N, typename Tag>
struct FixedBytes {
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  constexpr FixedBytes() = default;
  explicit constexpr FixedBytes(const std::array<std::uint8_t, N>& b) : bytes(b) {}

  static std::optional<FixedBytes> from_span(ByteView v) {
    if (v.size() != N) return std::nullopt;
    FixedBytes out;
    std::copy(v.begin(), v.end(), out.bytes.begin());
    return out;
  }

  ByteView view() const { return {bytes.data(), N}; }
  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }

  friend constexpr auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
};

struct AddressTag {};
struct Hash32Tag {};

/// 20-byte account identifier. Canonical text: "0x" + 40 lowercase hex digits.
struct Address : FixedBytes<20, AddressTag> {
  using FixedBytes::FixedBytes;
  Address() = default;
  Address(const FixedBytes<20, AddressTag>& f) : FixedBytes(f) {}

  std::string to_string() const { return "0x" + to_hex(view()); }
  static std::optional<Address> parse(std::string_view text);
};

/// 32-byte keccak-256 digest.
struct Hash32 : FixedBytes<32, Hash32Tag> {
  using FixedBytes::FixedBytes;
  Hash32() = default;
  Hash32(const FixedBytes<32, Hash32Tag>& f) : FixedBytes(f) {}

  std::string to_string() const { return "0x" + to_hex(view()); }
  static std::optional<Hash32> parse(std::string_view text);
};

using AccountHash = Hash32;

}  // namespace aid

template <std::size_t N, typename Tag>
struct std::hash<aid::FixedBytes<N, Tag>> {
  std::size_t operator()(const aid::FixedBytes<N, Tag>& v) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i) h = (h << 8) | v.bytes[i];
    return h;
  }
};
template <>
struct std::hash<aid::Address> : std::hash<aid::FixedBytes<20, aid::AddressTag>> {};
template <>
struct std::hash<aid::Hash32> : std::hash<aid::FixedBytes<32, aid::Hash32Tag>> {};
