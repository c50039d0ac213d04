#include "parlay_kelly/market.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "parlay_kelly/errors.hpp"

namespace parlay_kelly {

double price_from_odds(double odds) {
  if (!std::isfinite(odds) || odds <= 1.0) {
    throw ValidationError("invalid decimal odds " + std::to_string(odds) + " (must be finite and > 1)");
  }
  return 1.0 / odds;
}

namespace {

std::string outcome_tag(const std::string& event, std::size_t i, const std::string& label) {
  return "event '" + event + "' outcome " + std::to_string(i) + (label.empty() ? "" : " ('" + label + "')");
}

Event check_and_normalize(Event event) {
  const std::size_t n = event.probs.size();
  if (n < 2) {
    throw ValidationError("event '" + event.name + "' needs at least 2 outcomes");
  }
  if (event.prices.size() != n) {
    throw ValidationError("event '" + event.name + "' has mismatched probability/price lengths");
  }
  if (event.labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) event.labels.push_back(std::to_string(i + 1));
  }
  if (event.labels.size() != n) {
    throw ValidationError("event '" + event.name + "' has mismatched label count");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(event.labels[i]).second) {
      throw ValidationError("event '" + event.name + "' repeats label '" + event.labels[i] + "'");
    }
    if (!std::isfinite(event.probs[i]) || event.probs[i] <= 0.0) {
      throw ValidationError(outcome_tag(event.name, i, event.labels[i]) + " has nonpositive probability");
    }
    if (!std::isfinite(event.prices[i]) || event.prices[i] <= 0.0) {
      throw ValidationError(outcome_tag(event.name, i, event.labels[i]) + " has nonpositive price");
    }
  }
  const double total = std::accumulate(event.probs.begin(), event.probs.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    throw ValidationError("event '" + event.name + "' probabilities sum to " + std::to_string(total));
  }
  // Sums already at round-off level are left alone so validation is idempotent.
  if (std::abs(total - 1.0) > 8.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon()) {
    for (double& p : event.probs) p /= total;
  }
  return event;
}

}  // namespace

Event validate_event(const RawEvent& raw) {
  Event event;
  event.name = raw.name;
  for (std::size_t i = 0; i < raw.outcomes.size(); ++i) {
    const RawOutcome& o = raw.outcomes[i];
    if (o.price.has_value() == o.odds.has_value()) {
      throw ValidationError(outcome_tag(raw.name, i, o.label) + " must give exactly one of price/odds");
    }
    event.labels.push_back(o.label.empty() ? std::to_string(i + 1) : o.label);
    event.probs.push_back(o.prob);
    event.prices.push_back(o.price ? *o.price : price_from_odds(*o.odds));
  }
  return check_and_normalize(std::move(event));
}

Event validate_event(const Event& event) { return check_and_normalize(event); }

MarketSet validate_markets(std::vector<Event> events) {
  if (events.empty()) throw ValidationError("market set needs at least one event");
  MarketSet markets;
  std::set<std::string> names;
  for (auto& e : events) {
    if (!names.insert(e.name).second) {
      throw ValidationError("duplicate event name '" + e.name + "'");
    }
    markets.events.push_back(check_and_normalize(std::move(e)));
  }
  return markets;
}

double overround(const Event& event) {
  return std::accumulate(event.prices.begin(), event.prices.end(), 0.0);
}

std::vector<double> edge_ratios(const Event& event) {
  std::vector<double> ratios(event.size());
  for (std::size_t i = 0; i < event.size(); ++i) ratios[i] = event.probs[i] / event.prices[i];
  return ratios;
}

}  // namespace parlay_kelly
