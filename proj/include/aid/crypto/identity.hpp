#pragma once

#include <stdexcept>

#include "aid/core/bytes.hpp"

namespace aid::crypto {

struct SecretTag {};
struct PublicTag {};
struct ScalarTag {};

/// secp256k1 scalar in [1, n).
using SecretKey = FixedBytes<32, SecretTag>;
/// Uncompressed curve point x || y, without the 0x04 marker.
using PublicKey = FixedBytes<64, PublicTag>;
using Scalar = FixedBytes<32, ScalarTag>;

struct InvalidPoint : std::invalid_argument {
  InvalidPoint() : std::invalid_argument("public key is not a point on secp256k1") {}
};
struct InvalidSecret : std::invalid_argument {
  InvalidSecret() : std::invalid_argument("secret is not a scalar in [1, n)") {}
};

/// ECDSA signature with the signer's public key carried alongside, so
/// verification does not need key recovery. s is always in the low half
/// of the group order.
struct Signature {
  Scalar r;
  Scalar s;
  PublicKey public_key;

  friend bool operator==(const Signature&, const Signature&) = default;
};

struct KeyPair {
  SecretKey secret;
  PublicKey public_key;

  static KeyPair generate();
  /// Throws InvalidSecret when the scalar is zero or not below the order.
  static KeyPair from_secret(const SecretKey& secret);
  /// Deterministic key from arbitrary seed material, for reproducible
  /// networks and tests. Hashes the seed until it lands in [1, n).
  static KeyPair from_seed(ByteView seed);

  Address address() const;
};

bool is_valid_point(const PublicKey& pub);

/// Last 20 bytes of keccak256(x || y). Throws InvalidPoint.
Address derive_address(const PublicKey& pub);

/// Deterministic ECDSA (RFC 6979, HMAC-SHA256) over keccak256(message).
Signature sign(const KeyPair& key, ByteView message);

/// True iff the signature verifies against its carried key and canonical
/// low-s form holds.
bool verify_signature(const Signature& sig, ByteView message);

/// verify_signature plus derive_address(sig.public_key) == claimed_sender.
bool verify(const Signature& sig, ByteView message, const Address& claimed_sender);

/// Group order n, big-endian; exposed for tests that build high-s twins.
const Scalar& curve_order();

}  // namespace aid::crypto
