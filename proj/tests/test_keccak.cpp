#include <random>

#include "aid/crypto/keccak.hpp"
#include "doctest.h"
#include "keccak_reference.hpp"
#include "test_util.hpp"

using aid::crypto::keccak256;

namespace {
std::string hex_digest(std::string_view s) { return aid::to_hex(keccak256(aid::as_bytes(s)).view()); }
}  // namespace

TEST_CASE("published keccak-256 vectors") {
  CHECK(hex_digest("") == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
  CHECK(hex_digest("abc") == "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
  CHECK(hex_digest("The quick brown fox jumps over the lazy dog") ==
        "4d741b6f1eb29cb2a9b9911c82f56fa8d73b04959d3d9d222895df6c0b28aa15");
  CHECK(hex_digest("The quick brown fox jumps over the lazy dog.") ==
        "578951e24efd62a3d63a86f7cd19aaa53c898fe287d2552133220370240b572d");
  CHECK(hex_digest("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "45d3b367a6904e6e8d502ee04999a7c27647f91fa845d456525fd352ae3d7371");
  CHECK(hex_digest(std::string(200, '\xa3')) == "3a57666b048777f2c953dc4456f45a2588e1cb6f2da760122d530ac2ce607d4a");
  CHECK(hex_digest(std::string(1000000, 'a')) == "fadae6b49f129bbb812be8407b7b2894f34aecf6dbd1f9b0f0c7e9853098fc96");
}

TEST_CASE("differs from FIPS-202 SHA3-256 padding") {
  // SHA3-256("") starts with a7ffc6f8; keccak must not.
  CHECK(hex_digest("").rfind("a7ffc6f8", 0) != 0);
}

TEST_CASE("oracle agrees with published vectors") {
  CHECK(oracle::keccak256_hex({}) == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
  CHECK(oracle::keccak256_hex({'a', 'b', 'c'}) == "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST_CASE("frozen cross-check vectors") {
  auto rows = testutil::read_table("keccak_random.txt");
  REQUIRE(rows.size() == 1000);
  for (const auto& row : rows) {
    auto input = testutil::unhex(row[0]);
    CHECK(aid::to_hex(keccak256(input).view()) == row[1]);
  }
}

TEST_CASE("random inputs match the reference oracle") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::uint8_t> msg(rng() % 700);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
    auto digest = keccak256(msg);
    CHECK(digest.bytes.size() == 32);
    CHECK(aid::to_hex(digest.view()) == oracle::keccak256_hex(msg));
  }
}

TEST_CASE("incremental hashing matches one-shot across rate boundaries") {
  std::mt19937_64 rng(5);
  for (std::size_t n : {0u, 1u, 135u, 136u, 137u, 271u, 272u, 273u, 1000u}) {
    aid::Bytes msg(n);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
    aid::crypto::Keccak256 h;
    std::size_t pos = 0;
    while (pos < n) {
      std::size_t step = std::min<std::size_t>(n - pos, 1 + rng() % 150);
      h.update(aid::ByteView(msg).subspan(pos, step));
      pos += step;
    }
    CHECK(h.finalize() == keccak256(msg));
  }
}
