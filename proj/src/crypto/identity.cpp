#include "aid/crypto/identity.hpp"

#include <openssl/rand.h>
#include <secp256k1.h>

#include "aid/crypto/keccak.hpp"

namespace aid::crypto {

namespace {

const secp256k1_context* ctx() {
  struct Holder {
    secp256k1_context* c;
    Holder() : c(secp256k1_context_create(SECP256K1_CONTEXT_NONE)) {
      if (!c) throw std::bad_alloc();
    }
    ~Holder() { secp256k1_context_destroy(c); }
  };
  static const Holder h;
  return h.c;
}

bool parse_point(const PublicKey& pub, secp256k1_pubkey& out) {
  std::uint8_t buf[65];
  buf[0] = 0x04;
  std::copy(pub.bytes.begin(), pub.bytes.end(), buf + 1);
  return secp256k1_ec_pubkey_parse(ctx(), &out, buf, sizeof buf) == 1;
}

bool valid_secret(const SecretKey& s) { return secp256k1_ec_seckey_verify(ctx(), s.bytes.data()) == 1; }

Address address_of(const PublicKey& pub) {
  Hash32 h = keccak256(pub.view());
  Address out;
  std::copy(h.bytes.begin() + 12, h.bytes.end(), out.bytes.begin());
  return out;
}

}  // namespace

const Scalar& curve_order() {
  static const Scalar n = *Scalar::from_span(
      *from_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"));
  return n;
}

KeyPair KeyPair::from_secret(const SecretKey& secret) {
  if (!valid_secret(secret)) throw InvalidSecret();
  secp256k1_pubkey pk;
  if (secp256k1_ec_pubkey_create(ctx(), &pk, secret.bytes.data()) != 1) throw InvalidSecret();
  std::uint8_t buf[65];
  std::size_t len = sizeof buf;
  secp256k1_ec_pubkey_serialize(ctx(), buf, &len, &pk, SECP256K1_EC_UNCOMPRESSED);
  PublicKey pub;
  std::copy(buf + 1, buf + 65, pub.bytes.begin());
  return KeyPair{secret, pub};
}

KeyPair KeyPair::generate() {
  for (;;) {
    SecretKey s;
    if (RAND_bytes(s.bytes.data(), static_cast<int>(s.bytes.size())) != 1)
      throw std::runtime_error("system randomness unavailable");
    if (valid_secret(s)) return from_secret(s);
  }
}

KeyPair KeyPair::from_seed(ByteView seed) {
  Hash32 h = keccak256(seed);
  for (;;) {
    SecretKey s(h.bytes);
    if (valid_secret(s)) return from_secret(s);
    h = keccak256(h.view());
  }
}

Address KeyPair::address() const { return derive_address(public_key); }

bool is_valid_point(const PublicKey& pub) {
  secp256k1_pubkey pk;
  return parse_point(pub, pk);
}

Address derive_address(const PublicKey& pub) {
  if (!is_valid_point(pub)) throw InvalidPoint();
  return address_of(pub);
}

Signature sign(const KeyPair& key, ByteView message) {
  if (!valid_secret(key.secret)) throw InvalidSecret();
  Hash32 digest = keccak256(message);
  // Default nonce function is RFC 6979 (HMAC-SHA256); output is low-s.
  secp256k1_ecdsa_signature sig;
  if (secp256k1_ecdsa_sign(ctx(), &sig, digest.bytes.data(), key.secret.bytes.data(), nullptr, nullptr) != 1)
    throw std::runtime_error("signing failed");
  std::uint8_t rs[64];
  secp256k1_ecdsa_signature_serialize_compact(ctx(), rs, &sig);
  Signature out;
  std::copy(rs, rs + 32, out.r.bytes.begin());
  std::copy(rs + 32, rs + 64, out.s.bytes.begin());
  out.public_key = key.public_key;
  return out;
}

bool verify_signature(const Signature& sig, ByteView message) {
  std::uint8_t rs[64];
  std::copy(sig.r.bytes.begin(), sig.r.bytes.end(), rs);
  std::copy(sig.s.bytes.begin(), sig.s.bytes.end(), rs + 32);
  secp256k1_ecdsa_signature parsed;
  // parse_compact rejects r or s >= n; verify rejects zero values and high s.
  if (secp256k1_ecdsa_signature_parse_compact(ctx(), &parsed, rs) != 1) return false;
  secp256k1_pubkey pk;
  if (!parse_point(sig.public_key, pk)) return false;
  Hash32 digest = keccak256(message);
  return secp256k1_ecdsa_verify(ctx(), &parsed, digest.bytes.data(), &pk) == 1;
}

bool verify(const Signature& sig, ByteView message, const Address& claimed_sender) {
  return verify_signature(sig, message) && address_of(sig.public_key) == claimed_sender;
}

}  // namespace aid::crypto
