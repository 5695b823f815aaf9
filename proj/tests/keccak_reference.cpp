#include "keccak_reference.hpp"

#include <array>

namespace oracle {

namespace {

using Lanes = std::array<std::array<std::uint64_t, 5>, 5>;  // [x][y]

bool rc_bit(int t) {
  if (t % 255 == 0) return true;
  // LFSR over GF(2) with x^8 + x^6 + x^5 + x^4 + 1; reg[8] is the overflow bit.
  std::array<int, 9> reg{1, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 1; i <= t % 255; ++i) {
    for (int j = 8; j >= 1; --j) reg[j] = reg[j - 1];
    reg[0] = 0;
    reg[0] ^= reg[8];
    reg[4] ^= reg[8];
    reg[5] ^= reg[8];
    reg[6] ^= reg[8];
  }
  return reg[0] == 1;
}

struct Tables {
  std::array<std::uint64_t, 24> rc{};
  std::array<std::array<int, 5>, 5> rho{};

  Tables() {
    for (int ir = 0; ir < 24; ++ir) {
      std::uint64_t c = 0;
      for (int j = 0; j <= 6; ++j)
        if (rc_bit(j + 7 * ir)) c |= std::uint64_t{1} << ((1 << j) - 1);
      rc[ir] = c;
    }
    int x = 1, y = 0;
    rho[0][0] = 0;
    for (int t = 0; t < 24; ++t) {
      rho[x][y] = ((t + 1) * (t + 2) / 2) % 64;
      int nx = y, ny = (2 * x + 3 * y) % 5;
      x = nx;
      y = ny;
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

std::uint64_t rot(std::uint64_t v, int n) {
  n %= 64;
  return n == 0 ? v : (v << n) | (v >> (64 - n));
}

void permute(Lanes& a) {
  const Tables& tb = tables();
  for (int ir = 0; ir < 24; ++ir) {
    std::array<std::uint64_t, 5> c{}, d{};
    for (int x = 0; x < 5; ++x) c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
    for (int x = 0; x < 5; ++x) d[x] = c[(x + 4) % 5] ^ rot(c[(x + 1) % 5], 1);
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) a[x][y] ^= d[x];

    Lanes b{};
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) b[y][(2 * x + 3 * y) % 5] = rot(a[x][y], tb.rho[x][y]);

    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) a[x][y] = b[x][y] ^ ((~b[(x + 1) % 5][y]) & b[(x + 2) % 5][y]);

    a[0][0] ^= tb.rc[ir];
  }
}

}  // namespace

std::vector<std::uint8_t> keccak256(const std::vector<std::uint8_t>& message) {
  constexpr std::size_t rate_bytes = 136;
  std::vector<std::uint8_t> padded = message;
  padded.push_back(0x01);
  while (padded.size() % rate_bytes != 0) padded.push_back(0x00);
  padded.back() |= 0x80;

  Lanes a{};
  for (std::size_t off = 0; off < padded.size(); off += rate_bytes) {
    for (std::size_t i = 0; i < rate_bytes; ++i) {
      std::size_t lane = i / 8;
      int x = static_cast<int>(lane % 5), y = static_cast<int>(lane / 5);
      a[x][y] ^= std::uint64_t{padded[off + i]} << (8 * (i % 8));
    }
    permute(a);
  }

  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < 32; ++i) {
    std::size_t lane = i / 8;
    out.push_back(static_cast<std::uint8_t>(a[lane % 5][lane / 5] >> (8 * (i % 8))));
  }
  return out;
}

std::string keccak256_hex(const std::vector<std::uint8_t>& message) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto b : keccak256(message)) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace oracle
