#include "aid/consensus/validator_set.hpp"

#include <set>

namespace aid::consensus {

ValidatorSet::ValidatorSet(std::vector<Address> validators) : validators_(std::move(validators)) {
  if (validators_.empty()) throw std::invalid_argument("validator set is empty");
  std::set<Address> seen(validators_.begin(), validators_.end());
  if (seen.size() != validators_.size()) throw std::invalid_argument("duplicate validator address");
}

std::optional<std::size_t> ValidatorSet::index_of(const Address& a) const {
  for (std::size_t i = 0; i < validators_.size(); ++i)
    if (validators_[i] == a) return i;
  return std::nullopt;
}

}  // namespace aid::consensus
