#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "parlay_kelly/market.hpp"
#include "parlay_kelly/parlay_book.hpp"

namespace parlay_kelly {

/// Per-event stake vectors in full outcome coordinates: stakes[j][k] is the
/// single on outcome k of event j.
using StakeVectors = std::vector<std::vector<double>>;

/// Realized excess return of a unit single on outcome `coord` when outcome
/// `occurred` happens: [occurred == coord] / price - 1.
double excess_return(const Event& event, std::size_t occurred, std::size_t coord);

/// E[log(1 + sum_j x_j . Z_j)] over the full joint outcome space. Throws
/// InfeasibleStakesError naming the first joint outcome with nonpositive wealth.
double singles_objective(const MarketSet& markets, const StakeVectors& stakes,
                         std::size_t state_cap = kDefaultStateCap);

/// Score map F_j(x) = E[Z_j / (1 + sum_l x_l . Z_l)], one vector per event.
StakeVectors singles_score(const MarketSet& markets, const StakeVectors& stakes,
                           std::size_t state_cap = kDefaultStateCap);

struct SinglesOptions {
  double tol = 1e-11;
  std::size_t max_iter = 10'000;
  std::size_t state_cap = kDefaultStateCap;
  /// Starting point; defaults to the isolated per-event closed form.
  std::optional<StakeVectors> initial;
};

struct SinglesSolution {
  StakeVectors stakes;
  double cash = 1.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  std::size_t mirror_steps = 0;
};

/// Maximizes the singles-only growth rate over {x >= 0, sum x <= 1}.
///
/// Works on the simplex (cash, stakes). Each iteration takes the largest
/// holding as reference, so the budget never binds on the variables left
/// free, and runs a projected Newton step on the rest with a pseudo-inverse
/// (fair books have wealth-neutral directions) and a backtracking line search
/// that keeps wealth positive. A multiplicative step is the fallback when the
/// Newton step fails. Deterministic.
SinglesSolution optimize_singles(const MarketSet& markets, const SinglesOptions& options = {});

struct TicketOracleOptions {
  double tol = 1e-10;
  std::size_t max_iter = 500'000;
  std::size_t ticket_cap = 5'000;
  std::size_t state_cap = kDefaultStateCap;
  /// Tickets with stake above this floor count as "on support" for the stopping rule.
  double support_floor = 1e-9;
};

struct TicketOracleResult {
  TicketBook book;
  double objective = 0.0;
  double max_gradient = 0.0;       // max_t g_t; objective is within log(max_gradient) of optimal
  double support_residual = 0.0;   // max over tickets above support_floor of |g - 1|
  std::size_t iterations = 0;
};

/// Generic maximizer of E[log W_x(I)] over the ticket simplex using the
/// multiplicative update x_t <- x_t g_t from the uniform book. Knows nothing
/// about the per-event closed form.
TicketOracleResult optimize_ticket_space(const MarketSet& markets, const TicketOracleOptions& options = {});

struct GrowthGapReport {
  double v_par = 0.0;
  double v_sing = 0.0;
  double gap = 0.0;
};

/// Closed-form parlay growth against the numerical singles-only optimum.
GrowthGapReport growth_gap(const MarketSet& markets, const SinglesOptions& options = {});

}  // namespace parlay_kelly
