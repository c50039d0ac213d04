#pragma once

#include <vector>

#include "parlay_kelly/errors.hpp"

namespace parlay_kelly {

template <typename Fn>
void for_each_joint_outcome(const MarketSet& markets, std::size_t cap, Fn&& fn) {
  const std::size_t m = markets.size();
  if (joint_outcome_count(markets) > static_cast<double>(cap)) {
    throw MenuTooLargeError("joint outcome enumeration", joint_outcome_count(markets), static_cast<double>(cap));
  }
  std::vector<int> outcome(m, 0);
  // prefix[l] = prod_{k<l} p_{k, I_k}; recomputed from the changed position only.
  std::vector<double> prefix(m + 1, 1.0);
  for (std::size_t l = 0; l < m; ++l) prefix[l + 1] = prefix[l] * markets[l].probs[0];
  while (true) {
    fn(static_cast<const std::vector<int>&>(outcome), prefix[m]);
    std::size_t l = m;
    while (l > 0) {
      --l;
      if (static_cast<std::size_t>(++outcome[l]) < markets[l].size()) break;
      outcome[l] = 0;
      if (l == 0) return;
    }
    if (m == 0) return;
    for (std::size_t k = l; k < m; ++k) prefix[k + 1] = prefix[k] * markets[k].probs[outcome[k]];
  }
}

}  // namespace parlay_kelly
