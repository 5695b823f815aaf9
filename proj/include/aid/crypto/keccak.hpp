#pragma once

#include "aid/core/bytes.hpp"

namespace aid::crypto {

/// Keccak-256 with the original multi-rate padding (0x01 ... 0x80), as used
/// by Ethereum. This is not FIPS-202 SHA3-256, which pads with 0x06.
Hash32 keccak256(ByteView data);

/// Incremental form of keccak256 for multi-part inputs.
class Keccak256 {
 public:
  Keccak256& update(ByteView data);
  Hash32 finalize();

 private:
  static constexpr std::size_t rate = 136;
  std::uint64_t state_[25] = {};
  std::uint8_t buffer_[rate] = {};
  std::size_t buffered_ = 0;
};

}  // namespace aid::crypto
