#pragma once

#include <cstddef>
#include <vector>

#include "parlay_kelly/market.hpp"

namespace parlay_kelly {

/// Log-optimal allocation for one event in implicit-cash form.
///
/// Unbet cash is a claim paying 1 in every state, so terminal wealth in
/// outcome i is `cash + stakes[i] / price[i]`. All vectors are in the event's
/// original outcome order.
struct SingleEventSolution {
  double cash = 1.0;
  std::vector<double> stakes;
  std::vector<std::size_t> active_set;  // ascending outcome indices with positive stake
  double active_prob_mass = 0.0;
  double active_price_mass = 0.0;
  std::vector<double> wealth;
  double multiplier = 1.0;

  bool is_active(std::size_t i) const noexcept { return stakes[i] > 0.0; }
};

/// Relative margin below which an edge ratio counts as sitting on the cash
/// threshold; such boundary outcomes are reported inactive.
inline constexpr double kBoundaryTolerance = 1e-12;

/// Exact single-event Kelly solution.
///
/// Outcomes are scanned in decreasing order of p_i/pi_i (stable on ties). An
/// outcome joins the active prefix while its ratio exceeds the running cash
/// level c = (1 - P_A) / (1 - Q_A). Throws NoPositiveCashError when the
/// active price mass would reach 1 or the cash level would drop to zero.
SingleEventSolution solve_single_event(const Event& event);

/// F(i) = c + s_i / pi_i, the optimal wealth multiplier when outcome i occurs.
double wealth_factor(const Event& event, const SingleEventSolution& sol, std::size_t outcome);

/// sum_i p_i log F(i), in nats.
double single_event_growth(const Event& event, const SingleEventSolution& sol);

struct SingleKktReport {
  double budget_residual = 0.0;          // |cash + sum stakes - 1|
  double reciprocal_wealth_residual = 0.0;  // |E[1/W] - 1|
  double active_residual = 0.0;          // max_{active} |p/(pi W) - 1|
  double inactive_excess = 0.0;          // max_{inactive} (p/(pi W) - 1), expected <= 0
  double tolerance = 1e-10;
  bool pass = false;
};

/// Checks stationarity, complementary slackness and the budget identity for an
/// arbitrary (cash, stakes) pair. Stakes that differ from the ones that define
/// `sol.wealth` are allowed: wealth is recomputed from cash and stakes.
SingleKktReport verify_single_kkt(const Event& event, const SingleEventSolution& sol,
                                  double tolerance = 1e-10);

}  // namespace parlay_kelly
