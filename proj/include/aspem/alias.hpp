#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aspem/rng.hpp"

namespace aspem {

// Walker alias table: O(n) construction, O(1) draws with
// P(i) = w_i / sum(w). Rejects empty, negative and all-zero inputs.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(Rng& rng) const {
    std::size_t slot = uniform_index(rng, prob_.size());
    return uniform01(rng) < prob_[slot] ? slot : alias_[slot];
  }

  const std::vector<double>& prob() const { return prob_; }
  const std::vector<std::uint32_t>& alias() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace aspem
