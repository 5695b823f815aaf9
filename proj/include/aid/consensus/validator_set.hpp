#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "aid/core/bytes.hpp"

namespace aid::consensus {

/// Fixed consortium membership. Tolerates f = floor((N - 1) / 3) faults and
/// finalizes with quorum 2f + 1.
class ValidatorSet {
 public:
  /// Throws std::invalid_argument on an empty list or duplicate addresses.
  explicit ValidatorSet(std::vector<Address> validators);

  std::size_t size() const { return validators_.size(); }
  std::size_t max_faulty() const { return (validators_.size() - 1) / 3; }
  std::size_t quorum() const { return 2 * max_faulty() + 1; }

  bool contains(const Address& a) const { return index_of(a).has_value(); }
  std::optional<std::size_t> index_of(const Address& a) const;
  const Address& at(std::size_t i) const { return validators_.at(i); }
  const std::vector<Address>& addresses() const { return validators_; }

  /// Round-robin: validators[(height + round) mod N].
  const Address& proposer_for(std::uint64_t height, std::uint64_t round) const {
    return validators_[(height + round) % validators_.size()];
  }

 private:
  std::vector<Address> validators_;
};

}  // namespace aid::consensus
