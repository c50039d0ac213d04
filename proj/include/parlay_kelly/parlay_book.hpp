#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "parlay_kelly/market.hpp"
#include "parlay_kelly/single_event.hpp"

namespace parlay_kelly {

/// Leg value for an event the ticket does not select.
inline constexpr int kOmit = -1;

/// A joint bet: legs[l] is kOmit or a 0-based outcome index of event l.
/// Lexicographic ordering puts "omit" before every outcome.
struct Ticket {
  std::vector<int> legs;

  bool is_cash() const;
  std::size_t leg_count() const;
  auto operator<=>(const Ticket&) const = default;
};

/// Sparse allocation over the ticket menu. Only stored tickets carry stake;
/// every other ticket implicitly has stake 0.
struct TicketBook {
  std::map<Ticket, double> stakes;

  double stake(const Ticket& t) const;
  double total() const;
};

inline constexpr std::size_t kDefaultTicketCap = 1'000'000;
inline constexpr std::size_t kDefaultStateCap = 100'000;

/// prod_l (n_l + 1), as a double so overflow cannot hide a cap violation.
double ticket_count(const MarketSet& markets);

/// prod_l n_l.
double joint_outcome_count(const MarketSet& markets);

/// Mixed-radix indexing of the full ticket menu in lexicographic order.
class TicketIndex {
 public:
  TicketIndex(const MarketSet& markets, std::size_t cap = kDefaultTicketCap);

  std::size_t size() const noexcept { return size_; }
  std::size_t index(const Ticket& t) const;
  Ticket ticket(std::size_t index) const;
  /// Stride of event l in the index; selecting outcome i adds (i + 1) * stride.
  std::size_t stride(std::size_t event) const { return strides_[event]; }

 private:
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Every ticket, lexicographic with omit smallest. Throws MenuTooLargeError past `cap`.
std::vector<Ticket> enumerate_tickets(const MarketSet& markets, std::size_t cap = kDefaultTicketCap);

/// Product of selected-leg prices; 1 for the all-omit (cash) ticket.
double ticket_price(const Ticket& t, const MarketSet& markets);

/// Per-event closed-form solutions, in event order.
std::vector<SingleEventSolution> solve_events(const MarketSet& markets);

/// Outer product of the per-event Kelly strategies: omitted events contribute
/// their cash level, selected legs their stake. Exact zeros are not stored;
/// stakes at or below `emission_threshold` are dropped when it is positive.
TicketBook build_optimal_book(const MarketSet& markets, double emission_threshold = 0.0);
TicketBook build_optimal_book(const MarketSet& markets, const std::vector<SingleEventSolution>& solutions,
                              double emission_threshold = 0.0);

/// Terminal wealth: sum of stake/price over tickets matching every selected leg.
double book_wealth(const TicketBook& book, const MarketSet& markets, const std::vector<int>& outcome);

/// Sum of per-event optimal growth rates (nats).
double parlay_growth(const MarketSet& markets);

/// E[log W(I)] by exhaustive enumeration of joint outcomes.
double book_growth(const TicketBook& book, const MarketSet& markets, std::size_t state_cap = kDefaultStateCap);

struct TicketKktViolation {
  Ticket ticket;
  double stake = 0.0;
  double gradient = 0.0;
};

struct TicketKktReport {
  std::size_t tickets = 0;
  std::size_t support_size = 0;
  double budget_residual = 0.0;
  double max_support_residual = 0.0;    // max on support |g - 1|
  double max_off_support_gradient = 0.0;  // max off support g (0 when support is everything)
  double tolerance = 1e-10;
  double strict_margin = 1e-12;
  bool pass = false;         // on-support |g-1| <= tol, off-support g <= 1 + tol, budget
  bool strict_pass = false;  // additionally every off-support g < 1 - strict_margin
  std::vector<TicketKktViolation> violations;  // sorted by ticket
};

/// Gradient g_t = E[1{t matches I} / (pi_t W(I))] for every ticket in index order.
std::vector<double> ticket_gradients(const std::vector<double>& dense_stakes, const MarketSet& markets,
                                     const TicketIndex& index, std::size_t state_cap = kDefaultStateCap);

/// KKT check of a book over the whole ticket menu with multiplier 1.
TicketKktReport verify_ticket_kkt(const TicketBook& book, const MarketSet& markets, double tolerance = 1e-10,
                                  std::size_t ticket_cap = kDefaultTicketCap,
                                  std::size_t state_cap = kDefaultStateCap);

/// Tickets with strictly positive stake.
std::vector<Ticket> active_tickets(const TicketBook& book);

/// Visits every joint outcome in lexicographic order with its probability.
/// Throws MenuTooLargeError past `cap`.
template <typename Fn>
void for_each_joint_outcome(const MarketSet& markets, std::size_t cap, Fn&& fn);

}  // namespace parlay_kelly

#include "parlay_kelly/detail/joint_outcomes.hpp"
