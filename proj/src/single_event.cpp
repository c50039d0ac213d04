#include "parlay_kelly/single_event.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parlay_kelly/errors.hpp"

namespace parlay_kelly {

SingleEventSolution solve_single_event(const Event& event) {
  const std::size_t n = event.size();
  const std::vector<double> ratio = edge_ratios(event);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ratio[a] > ratio[b]; });

  double cash = 1.0;
  double prob_mass = 0.0;
  double price_mass = 0.0;
  std::size_t active_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (ratio[i] <= cash * (1.0 + kBoundaryTolerance)) break;
    const double next_prob = prob_mass + event.probs[i];
    const double next_price = price_mass + event.prices[i];
    if (next_price >= 1.0) throw NoPositiveCashError(event.name);
    const double next_cash = (1.0 - next_prob) / (1.0 - next_price);
    if (!(next_cash > 0.0)) throw NoPositiveCashError(event.name);
    prob_mass = next_prob;
    price_mass = next_price;
    cash = next_cash;
    ++active_count;
  }

  SingleEventSolution sol;
  sol.cash = cash;
  sol.active_prob_mass = prob_mass;
  sol.active_price_mass = price_mass;
  sol.stakes.assign(n, 0.0);
  sol.wealth.assign(n, cash);
  sol.active_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(active_count));
  std::sort(sol.active_set.begin(), sol.active_set.end());
  for (std::size_t i : sol.active_set) {
    sol.stakes[i] = event.probs[i] - cash * event.prices[i];
    sol.wealth[i] = ratio[i];
  }
  return sol;
}

double wealth_factor(const Event& event, const SingleEventSolution& sol, std::size_t outcome) {
  if (outcome >= event.size() || outcome >= sol.stakes.size()) {
    throw std::out_of_range("outcome index " + std::to_string(outcome) + " out of range for event '" +
                            event.name + "'");
  }
  return sol.cash + sol.stakes[outcome] / event.prices[outcome];
}

double single_event_growth(const Event& event, const SingleEventSolution& sol) {
  double growth = 0.0;
  for (std::size_t i = 0; i < event.size(); ++i) {
    growth += event.probs[i] * std::log(wealth_factor(event, sol, i));
  }
  return growth;
}

SingleKktReport verify_single_kkt(const Event& event, const SingleEventSolution& sol, double tolerance) {
  SingleKktReport report;
  report.tolerance = tolerance;
  const double total_stake = std::accumulate(sol.stakes.begin(), sol.stakes.end(), 0.0);
  report.budget_residual = std::abs(sol.cash + total_stake - 1.0);

  double recip = 0.0;
  bool any_inactive = false;
  report.inactive_excess = -1.0;
  for (std::size_t i = 0; i < event.size(); ++i) {
    const double w = sol.cash + sol.stakes[i] / event.prices[i];
    if (!(w > 0.0)) {
      report.pass = false;
      report.reciprocal_wealth_residual = INFINITY;
      return report;
    }
    recip += event.probs[i] / w;
    const double score = event.probs[i] / (event.prices[i] * w) - 1.0;
    if (sol.stakes[i] > 0.0) {
      report.active_residual = std::max(report.active_residual, std::abs(score));
    } else {
      report.inactive_excess = any_inactive ? std::max(report.inactive_excess, score) : score;
      any_inactive = true;
    }
  }
  report.reciprocal_wealth_residual = std::abs(recip - 1.0);
  report.pass = report.budget_residual <= tolerance && report.reciprocal_wealth_residual <= tolerance &&
                report.active_residual <= tolerance && report.inactive_excess <= tolerance;
  return report;
}

}  // namespace parlay_kelly
