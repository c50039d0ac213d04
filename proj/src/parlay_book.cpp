#include "parlay_kelly/parlay_book.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parlay_kelly/errors.hpp"

namespace parlay_kelly {

bool Ticket::is_cash() const {
  return std::all_of(legs.begin(), legs.end(), [](int leg) { return leg == kOmit; });
}

std::size_t Ticket::leg_count() const {
  return static_cast<std::size_t>(std::count_if(legs.begin(), legs.end(), [](int leg) { return leg != kOmit; }));
}

double TicketBook::stake(const Ticket& t) const {
  auto it = stakes.find(t);
  return it == stakes.end() ? 0.0 : it->second;
}

double TicketBook::total() const {
  double sum = 0.0;
  for (const auto& [ticket, stake] : stakes) sum += stake;
  return sum;
}

double ticket_count(const MarketSet& markets) {
  double count = 1.0;
  for (const auto& e : markets.events) count *= static_cast<double>(e.size() + 1);
  return count;
}

double joint_outcome_count(const MarketSet& markets) {
  double count = 1.0;
  for (const auto& e : markets.events) count *= static_cast<double>(e.size());
  return count;
}

TicketIndex::TicketIndex(const MarketSet& markets, std::size_t cap) {
  const double required = ticket_count(markets);
  if (required > static_cast<double>(cap)) {
    throw MenuTooLargeError("ticket menu", required, static_cast<double>(cap));
  }
  const std::size_t m = markets.size();
  radix_.resize(m);
  strides_.resize(m);
  std::size_t stride = 1;
  for (std::size_t l = m; l-- > 0;) {
    radix_[l] = markets[l].size() + 1;
    strides_[l] = stride;
    stride *= radix_[l];
  }
  size_ = stride;
}

std::size_t TicketIndex::index(const Ticket& t) const {
  if (t.legs.size() != radix_.size()) {
    throw std::invalid_argument("ticket has " + std::to_string(t.legs.size()) + " legs, market set has " +
                                std::to_string(radix_.size()) + " events");
  }
  std::size_t idx = 0;
  for (std::size_t l = 0; l < radix_.size(); ++l) {
    const int leg = t.legs[l];
    if (leg < kOmit || static_cast<std::size_t>(leg + 1) >= radix_[l]) {
      throw std::out_of_range("ticket leg " + std::to_string(leg) + " out of range for event " + std::to_string(l));
    }
    idx += static_cast<std::size_t>(leg + 1) * strides_[l];
  }
  return idx;
}

Ticket TicketIndex::ticket(std::size_t index) const {
  Ticket t;
  t.legs.resize(radix_.size());
  for (std::size_t l = 0; l < radix_.size(); ++l) {
    t.legs[l] = static_cast<int>((index / strides_[l]) % radix_[l]) - 1;
  }
  return t;
}

std::vector<Ticket> enumerate_tickets(const MarketSet& markets, std::size_t cap) {
  const TicketIndex index(markets, cap);
  std::vector<Ticket> tickets;
  tickets.reserve(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) tickets.push_back(index.ticket(k));
  return tickets;
}

double ticket_price(const Ticket& t, const MarketSet& markets) {
  double price = 1.0;
  for (std::size_t l = 0; l < t.legs.size(); ++l) {
    if (t.legs[l] != kOmit) price *= markets[l].prices.at(static_cast<std::size_t>(t.legs[l]));
  }
  return price;
}

std::vector<SingleEventSolution> solve_events(const MarketSet& markets) {
  std::vector<SingleEventSolution> solutions;
  solutions.reserve(markets.size());
  for (const auto& e : markets.events) solutions.push_back(solve_single_event(e));
  return solutions;
}

TicketBook build_optimal_book(const MarketSet& markets, double emission_threshold) {
  return build_optimal_book(markets, solve_events(markets), emission_threshold);
}

TicketBook build_optimal_book(const MarketSet& markets, const std::vector<SingleEventSolution>& solutions,
                              double emission_threshold) {
  // Only factors with positive weight can produce a nonzero product, so the
  // support is enumerated directly: per event, the cash slot plus active legs.
  const std::size_t m = markets.size();
  std::vector<std::vector<std::pair<int, double>>> factors(m);
  for (std::size_t l = 0; l < m; ++l) {
    factors[l].emplace_back(kOmit, solutions[l].cash);
    for (std::size_t i : solutions[l].active_set) {
      factors[l].emplace_back(static_cast<int>(i), solutions[l].stakes[i]);
    }
  }

  TicketBook book;
  std::vector<std::size_t> pos(m, 0);
  Ticket t;
  t.legs.resize(m);
  while (true) {
    double stake = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
      t.legs[l] = factors[l][pos[l]].first;
      stake *= factors[l][pos[l]].second;
    }
    if (stake > 0.0 && stake > emission_threshold) book.stakes.emplace(t, stake);

    std::size_t l = m;
    bool done = true;
    while (l-- > 0) {
      if (++pos[l] < factors[l].size()) {
        done = false;
        break;
      }
      pos[l] = 0;
    }
    if (done) break;
  }
  return book;
}

double book_wealth(const TicketBook& book, const MarketSet& markets, const std::vector<int>& outcome) {
  const std::size_t m = markets.size();
  if (outcome.size() != m) throw std::invalid_argument("outcome vector length does not match market set");
  for (std::size_t l = 0; l < m; ++l) {
    if (outcome[l] < 0 || static_cast<std::size_t>(outcome[l]) >= markets[l].size()) {
      throw std::out_of_range("outcome " + std::to_string(outcome[l]) + " out of range for event '" +
                              markets[l].name + "'");
    }
  }
  double wealth = 0.0;
  for (const auto& [ticket, stake] : book.stakes) {
    bool matches = true;
    for (std::size_t l = 0; l < m && matches; ++l) {
      matches = ticket.legs[l] == kOmit || ticket.legs[l] == outcome[l];
    }
    if (matches) wealth += stake / ticket_price(ticket, markets);
  }
  return wealth;
}

double parlay_growth(const MarketSet& markets) {
  double growth = 0.0;
  for (const auto& e : markets.events) growth += single_event_growth(e, solve_single_event(e));
  return growth;
}

namespace {

std::vector<double> dense_stakes(const TicketBook& book, const TicketIndex& index) {
  std::vector<double> dense(index.size(), 0.0);
  for (const auto& [ticket, stake] : book.stakes) dense[index.index(ticket)] += stake;
  return dense;
}

std::vector<double> dense_prices(const MarketSet& markets, const TicketIndex& index) {
  std::vector<double> prices(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) prices[k] = ticket_price(index.ticket(k), markets);
  return prices;
}

// Calls fn(ticket_index) for each of the 2^m tickets compatible with `outcome`.
template <typename Fn>
void for_each_compatible(const std::vector<int>& outcome, const TicketIndex& index, Fn&& fn) {
  const std::size_t m = outcome.size();
  const std::size_t masks = std::size_t{1} << m;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    std::size_t idx = 0;
    for (std::size_t l = 0; l < m; ++l) {
      if (mask & (std::size_t{1} << (m - 1 - l))) idx += static_cast<std::size_t>(outcome[l] + 1) * index.stride(l);
    }
    fn(idx);
  }
}

}  // namespace

double book_growth(const TicketBook& book, const MarketSet& markets, std::size_t state_cap) {
  const TicketIndex index(markets, kDefaultTicketCap);
  const auto stakes = dense_stakes(book, index);
  const auto prices = dense_prices(markets, index);
  double growth = 0.0;
  for_each_joint_outcome(markets, state_cap, [&](const std::vector<int>& outcome, double prob) {
    double wealth = 0.0;
    for_each_compatible(outcome, index, [&](std::size_t k) { wealth += stakes[k] / prices[k]; });
    growth += prob * std::log(wealth);
  });
  return growth;
}

std::vector<double> ticket_gradients(const std::vector<double>& stakes, const MarketSet& markets,
                                     const TicketIndex& index, std::size_t state_cap) {
  const auto prices = dense_prices(markets, index);
  std::vector<double> grad(index.size(), 0.0);
  for_each_joint_outcome(markets, state_cap, [&](const std::vector<int>& outcome, double prob) {
    double wealth = 0.0;
    for_each_compatible(outcome, index, [&](std::size_t k) { wealth += stakes[k] / prices[k]; });
    if (!(wealth > 0.0)) {
      throw InfeasibleStakesError("ticket book has nonpositive wealth in some joint outcome");
    }
    const double weight = prob / wealth;
    for_each_compatible(outcome, index, [&](std::size_t k) { grad[k] += weight / prices[k]; });
  });
  return grad;
}

TicketKktReport verify_ticket_kkt(const TicketBook& book, const MarketSet& markets, double tolerance,
                                  std::size_t ticket_cap, std::size_t state_cap) {
  const TicketIndex index(markets, ticket_cap);
  const auto stakes = dense_stakes(book, index);
  TicketKktReport report;
  report.tickets = index.size();
  report.tolerance = tolerance;
  double total = 0.0;
  for (double x : stakes) total += x;
  report.budget_residual = std::abs(total - 1.0);

  std::vector<double> grad;
  try {
    grad = ticket_gradients(stakes, markets, index, state_cap);
  } catch (const InfeasibleStakesError&) {
    report.pass = false;
    report.strict_pass = false;
    report.max_support_residual = INFINITY;
    return report;
  }

  bool any_off = false;
  bool strict = true;
  for (std::size_t k = 0; k < index.size(); ++k) {
    const double g = grad[k];
    bool violates = false;
    if (stakes[k] > 0.0) {
      ++report.support_size;
      report.max_support_residual = std::max(report.max_support_residual, std::abs(g - 1.0));
      violates = std::abs(g - 1.0) > tolerance;
    } else {
      report.max_off_support_gradient = any_off ? std::max(report.max_off_support_gradient, g) : g;
      any_off = true;
      violates = g > 1.0 + tolerance;
      if (g >= 1.0 - report.strict_margin) strict = false;
    }
    if (violates) report.violations.push_back({index.ticket(k), stakes[k], g});
  }
  report.pass = report.violations.empty() && report.budget_residual <= tolerance;
  report.strict_pass = report.pass && strict;
  return report;
}

std::vector<Ticket> active_tickets(const TicketBook& book) {
  std::vector<Ticket> active;
  for (const auto& [ticket, stake] : book.stakes) {
    if (stake > 0.0) active.push_back(ticket);
  }
  return active;
}

}  // namespace parlay_kelly
