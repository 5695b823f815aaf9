#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "aid/core/amount.hpp"
#include "aid/core/bytes.hpp"

namespace aid {

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Canonical binary encoder: big-endian fixed-width integers, u32
/// length-prefixed byte strings, fixed-size values written raw.
class Writer {
 public:
  Writer& u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
  }
  Writer& u32(std::uint32_t v) { return be(v, 4); }
  Writer& u64(std::uint64_t v) { return be(v, 8); }
  Writer& amount(Amount a) {
    be(static_cast<std::uint64_t>(a.value() >> 64), 8);
    return be(static_cast<std::uint64_t>(a.value()), 8);
  }
  Writer& raw(ByteView v) {
    out_.insert(out_.end(), v.begin(), v.end());
    return *this;
  }
  template <std::size_t N, typename Tag>
  Writer& fixed(const FixedBytes<N, Tag>& v) {
    return raw(v.view());
  }
  Writer& bytes(ByteView v) {
    u32(static_cast<std::uint32_t>(v.size()));
    return raw(v);
  }
  Writer& str(std::string_view s) { return bytes(as_bytes(s)); }

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Writer& be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes out_;
};

/// Decoder mirroring Writer. Every read throws DecodeError on underrun;
/// finish() rejects trailing bytes.
class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  Amount amount() {
    u128 hi = be(8);
    u128 lo = be(8);
    return Amount((hi << 64) | lo);
  }
  ByteView raw(std::size_t n) {
    need(n);
    auto v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  template <typename T>
  T fixed() {
    auto v = raw(T::size);
    T out;
    std::copy(v.begin(), v.end(), out.bytes.begin());
    return out;
  }
  Bytes bytes() {
    auto n = u32();
    auto v = raw(n);
    return Bytes(v.begin(), v.end());
  }
  std::string str() {
    auto b = bytes();
    return std::string(b.begin(), b.end());
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  void finish() const {
    if (pos_ != in_.size()) throw DecodeError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("unexpected end of input");
  }
  std::uint64_t be(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace aid
