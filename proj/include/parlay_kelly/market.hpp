#pragma once

#include <optional>
#include <string>
#include <vector>

namespace parlay_kelly {

/// One multi-outcome market: bettor probabilities and state prices (cost of a
/// claim paying 1 if the outcome occurs).
struct Event {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<double> prices;

  std::size_t size() const noexcept { return probs.size(); }
  bool operator==(const Event&) const = default;
};

/// Mutually independent events played simultaneously.
struct MarketSet {
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  const Event& operator[](std::size_t i) const { return events[i]; }
  bool operator==(const MarketSet&) const = default;
};

/// Unvalidated outcome as read from an input file. Exactly one of price/odds.
struct RawOutcome {
  std::string label;
  double prob = 0.0;
  std::optional<double> price;
  std::optional<double> odds;
};

struct RawEvent {
  std::string name;
  std::vector<RawOutcome> outcomes;
};

/// Tolerance on the input probability sum before renormalization.
inline constexpr double kProbSumTolerance = 1e-9;

/// Decimal odds to state price (1/odds). Throws ValidationError unless odds > 1.
double price_from_odds(double odds);

/// Checks a raw event and converts it to an Event. Probabilities are
/// renormalized to sum to exactly 1 after the tolerance check.
Event validate_event(const RawEvent& raw);

/// Re-validates an Event already in internal form.
Event validate_event(const Event& event);

/// Validates every event and checks that names are unique.
MarketSet validate_markets(std::vector<Event> events);

double overround(const Event& event);

/// p_i / pi_i in outcome order.
std::vector<double> edge_ratios(const Event& event);

}  // namespace parlay_kelly
