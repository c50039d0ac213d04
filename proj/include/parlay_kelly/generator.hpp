#pragma once

#include <cstdint>

#include "parlay_kelly/market.hpp"

namespace parlay_kelly {

struct GeneratorOptions {
  std::uint64_t seed = 1;
  std::size_t events = 2;
  std::size_t outcomes = 3;
  double min_overround = 1.0;
  double max_overround = 1.1;
  /// Rejection attempts per event before giving up.
  std::size_t max_attempts = 10'000;
};

/// Seeded random market set. Prices are a normalized positive vector scaled to
/// an overround drawn from [min_overround, max_overround]; probabilities an
/// independent normalized positive vector. Each event is redrawn until its
/// Kelly optimum has positive cash. Identical options give identical markets.
MarketSet generate_markets(const GeneratorOptions& options);

}  // namespace parlay_kelly
