#include "parlay_kelly/generator.hpp"

#include <random>
#include <string>

#include "parlay_kelly/errors.hpp"
#include "parlay_kelly/single_event.hpp"

namespace parlay_kelly {

namespace {

// Uniform in [0, 1) from the raw engine output so results do not depend on
// the standard library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> positive_simplex(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = 0.05 + unit(rng);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

MarketSet generate_markets(const GeneratorOptions& options) {
  if (options.events == 0 || options.outcomes < 2) {
    throw ValidationError("generator needs at least one event and two outcomes");
  }
  if (!(options.min_overround > 0.0) || options.max_overround < options.min_overround) {
    throw ValidationError("generator overround range is invalid");
  }
  std::mt19937_64 rng(options.seed);
  std::vector<Event> events;
  for (std::size_t j = 0; j < options.events; ++j) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < options.max_attempts && !accepted; ++attempt) {
      Event e;
      e.name = "e" + std::to_string(j + 1);
      const double over = options.min_overround + (options.max_overround - options.min_overround) * unit(rng);
      e.prices = positive_simplex(rng, options.outcomes);
      for (double& p : e.prices) p *= over;
      e.probs = positive_simplex(rng, options.outcomes);
      for (std::size_t i = 0; i < options.outcomes; ++i) e.labels.push_back(std::string(1, static_cast<char>('A' + i % 26)) + (i >= 26 ? std::to_string(i / 26) : ""));
      try {
        const Event valid = validate_event(e);
        solve_single_event(valid);
        events.push_back(valid);
        accepted = true;
      } catch (const NoPositiveCashError&) {
      }
    }
    if (!accepted) throw SolverError("generator could not draw a positive-cash event");
  }
  return validate_markets(std::move(events));
}

}  // namespace parlay_kelly
