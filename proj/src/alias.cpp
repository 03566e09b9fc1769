#include "aspem/alias.hpp"

#include <cmath>
#include <stdexcept>

namespace aspem {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table: empty weight vector");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0 || !std::isfinite(w))
      throw std::invalid_argument("alias table: weights must be nonnegative and finite");
    sum += w;
  }
  if (sum <= 0) throw std::invalid_argument("alias table: all weights are zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / sum;

  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));

  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back();
    std::uint32_t l = large.back();
    small.pop_back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  // residual entries are within rounding of 1
  for (std::uint32_t i : large) prob_[i] = 1.0;
  for (std::uint32_t i : small) prob_[i] = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    if (prob_[i] == 1.0) alias_[i] = static_cast<std::uint32_t>(i);
}

}  // namespace aspem
