#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "parlay_kelly/asymptotics.hpp"
#include "parlay_kelly/errors.hpp"
#include "parlay_kelly/generator.hpp"
#include "parlay_kelly/parlay_book.hpp"
#include "parlay_kelly/single_event.hpp"
#include "parlay_kelly/singles.hpp"

using namespace parlay_kelly;

namespace {

Event event(const std::string& name, std::vector<double> p, std::vector<double> pi) {
  Event e;
  e.name = name;
  for (std::size_t i = 0; i < p.size(); ++i) e.labels.push_back(std::to_string(i + 1));
  e.probs = std::move(p);
  e.prices = std::move(pi);
  return validate_event(e);
}

Event even_money(const std::string& name, double m) { return event(name, {(1 + m) / 2, (1 - m) / 2}, {0.5, 0.5}); }

MarketSet running() {
  return validate_markets({event("e1", {0.6, 0.4}, {0.5, 0.5}), event("e2", {0.5, 0.3, 0.2}, {0.45, 0.35, 0.25})});
}

StakeVectors unflatten(const MarketSet& m, const std::vector<double>& flat) {
  StakeVectors s;
  std::size_t k = 0;
  for (const auto& e : m.events) {
    s.emplace_back(flat.begin() + static_cast<long>(k), flat.begin() + static_cast<long>(k + e.size()));
    k += e.size();
  }
  return s;
}

}  // namespace

TEST_CASE("excess returns") {
  const Event e = event("e", {0.25, 0.25, 0.5}, {0.5, 0.25, 0.25});
  CHECK(excess_return(e, 0, 0) == 1.0);
  CHECK(excess_return(e, 1, 0) == -1.0);
  CHECK(excess_return(e, 1, 1) == 3.0);
  CHECK_THROWS_AS(excess_return(e, 3, 0), std::out_of_range);
}

TEST_CASE("singles objective by exact enumeration") {
  const MarketSet one = validate_markets({event("a", {0.6, 0.4}, {0.5, 0.5})});
  CHECK(singles_objective(one, {{0.0, 0.0}}) == 0.0);
  CHECK(singles_objective(one, {{0.2, 0.0}}) == doctest::Approx(0.0201355135506889).epsilon(1e-13));

  // 0.36 ln 1.4 + 0.48 ln 1 + 0.16 ln 0.6, evaluated in extended precision.
  const MarketSet two =
      validate_markets({event("a", {0.6, 0.4}, {0.5, 0.5}), event("b", {0.6, 0.4}, {0.5, 0.5})});
  CHECK(singles_objective(two, {{0.2, 0.0}, {0.2, 0.0}}) == doctest::Approx(0.0393979053810781).epsilon(1e-13));

  CHECK_THROWS_AS(singles_objective(two, {{0.5, 0.0}, {0.5, 0.0}}), InfeasibleStakesError);
  CHECK_THROWS_AS(singles_objective(two, {{0.5, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(singles_objective(two, {{0.1, 0.0}, {0.1, 0.0}}, 3), MenuTooLargeError);
}

TEST_CASE("analytic score matches central differences") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GeneratorOptions g;
    g.seed = 300 + seed;
    g.events = 1 + seed % 3;
    g.outcomes = 2 + seed % 2;
    const MarketSet m = generate_markets(g);
    std::vector<double> x;
    for (const auto& e : m.events) {
      for (std::size_t i = 0; i < e.size(); ++i) x.push_back(0.05 * u(rng));
    }
    const auto score = singles_score(m, unflatten(m, x));
    const auto fd = oracle::central_gradient(
        [&](const std::vector<double>& v) { return singles_objective(m, unflatten(m, v)); }, x, 1e-6);
    std::size_t k = 0;
    for (const auto& row : score) {
      for (double s : row) {
        CAPTURE(seed);
        CHECK(std::abs(s - fd[k]) <= 1e-6 * std::max(1.0, std::abs(s)));
        ++k;
      }
    }
  }
}

TEST_CASE("singles objective is midpoint concave along random segments") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MarketSet m = running();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(5), b(5), mid(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = 0.15 * u(rng);
      b[i] = 0.15 * u(rng);
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    const double fa = singles_objective(m, unflatten(m, a));
    const double fb = singles_objective(m, unflatten(m, b));
    const double fm = singles_objective(m, unflatten(m, mid));
    CHECK(fm >= 0.5 * (fa + fb) - 1e-12);
  }
}

TEST_CASE("two even-money binaries reproduce the exact two-bet pair") {
  const auto [f1, f2] = thorp_exact(0.1, 0.2);
  CHECK(f1 == doctest::Approx(0.0960384153661465).epsilon(1e-14));
  CHECK(f2 == doctest::Approx(0.198079231692677).epsilon(1e-14));
  const MarketSet m = validate_markets({even_money("a", 0.1), even_money("b", 0.2)});
  SinglesOptions o;
  o.tol = 1e-13;
  const auto s = optimize_singles(m, o);
  CHECK(std::abs(s.stakes[0][0] - f1) <= 1e-10);
  CHECK(std::abs(s.stakes[1][0] - f2) <= 1e-10);
  CHECK(s.stakes[0][1] == 0.0);
  CHECK(s.stakes[1][1] == 0.0);
  CHECK(s.kkt_residual <= 1e-13);
  CHECK(std::abs(s.cash + f1 + f2 - 1.0) <= 1e-12);
  CHECK(thorp_exact(0.3, 0.0) == std::pair<double, double>{0.3, 0.0});
  CHECK(thorp_exact(0.0, 0.0) == std::pair<double, double>{0.0, 0.0});
}

TEST_CASE("shrinkage matches -m1 m2^2 up to a relative O(m^2) remainder") {
  for (double m : {0.02, 0.04, 0.08}) {
    const auto [f1, f2] = thorp_exact(m, 2 * m);
    const double pred1 = -m * (2 * m) * (2 * m), pred2 = -(2 * m) * m * m;
    CHECK(std::abs((f1 - m) / pred1 - 1.0) <= 10 * m * m);
    CHECK(std::abs((f2 - 2 * m) / pred2 - 1.0) <= 10 * m * m);
  }
}

TEST_CASE("one event: singles optimum equals the closed form") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorOptions g;
    g.seed = 900 + seed;
    g.events = 1;
    g.outcomes = 2 + seed % 4;
    const MarketSet m = generate_markets(g);
    const auto closed = solve_single_event(m[0]);
    const auto s = optimize_singles(m);
    CAPTURE(seed);
    for (std::size_t i = 0; i < m[0].size(); ++i) CHECK(std::abs(s.stakes[0][i] - closed.stakes[i]) <= 1e-8);
    CHECK(std::abs(growth_gap(m).gap) <= 1e-10);
  }
}

TEST_CASE("fair markets: zero stakes, zero value, zero gap") {
  const MarketSet m = validate_markets({event("a", {0.5, 0.5}, {0.5, 0.5}), event("b", {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5})});
  const auto s = optimize_singles(m);
  for (const auto& row : s.stakes) {
    for (double x : row) CHECK(x == 0.0);
  }
  CHECK(s.objective == 0.0);
  const auto gap = growth_gap(m);
  CHECK(gap.v_par == 0.0);
  CHECK(gap.gap == 0.0);
}

TEST_CASE("fair event with edge: canonical stakes leave one outcome unbacked") {
  // Backing every outcome in proportion to its price is the same as holding
  // cash here, so the optimum is a segment; the solver reports its endpoint.
  const MarketSet m = validate_markets({event("a", {0.5, 0.3, 0.2}, {0.4, 0.35, 0.25}),
                                        event("b", {0.6, 0.4}, {0.5, 0.5})});
  const auto s = optimize_singles(m);
  for (const auto& row : s.stakes) CHECK(*std::min_element(row.begin(), row.end()) == 0.0);
  CHECK(s.kkt_residual <= 1e-11);
}

TEST_CASE("growth gap pins for two even-money binaries") {
  // v_par and v_sing re-derived in 30-digit arithmetic from the exact pair.
  const MarketSet m = validate_markets({even_money("a", 0.1), even_money("b", 0.2)});
  const auto r = growth_gap(m);
  CHECK(r.v_par == doctest::Approx(0.0251438803970457).epsilon(1e-13));
  CHECK(r.v_sing == doctest::Approx(0.0249438670615786).epsilon(1e-12));
  CHECK(r.gap == doctest::Approx(2.00013335467124e-4).epsilon(1e-8));
  CHECK(r.gap >= 0.0);
}

TEST_CASE("singles never beat parlays; repeated runs are bit-identical") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorOptions g;
    g.seed = 40 + seed;
    g.events = 2 + seed % 2;
    g.outcomes = 2 + seed % 3;
    const MarketSet m = generate_markets(g);
    const auto a = optimize_singles(m);
    const auto b = optimize_singles(m);
    CAPTURE(seed);
    CHECK(a.stakes == b.stakes);
    CHECK(a.objective == b.objective);
    CHECK(a.objective <= parlay_growth(m) + 1e-11);
    CHECK(a.cash >= 0.0);
    CHECK(a.kkt_residual <= 1e-11);
  }
}

TEST_CASE("ticket-space oracle") {
  const MarketSet one = validate_markets({event("a", {0.6, 0.4}, {0.5, 0.5})});
  // The market is fair, so the optimal book is only unique up to moving
  // cash into both outcomes in proportion to price. Compare wealth, then the
  // book with that shift undone.
  const auto r1 = optimize_ticket_space(one);
  const double c = r1.book.stake(Ticket{{kOmit}});
  const double a = r1.book.stake(Ticket{{0}});
  const double b = r1.book.stake(Ticket{{1}});
  CHECK(std::abs(c + a / 0.5 - 1.2) <= 1e-6);
  CHECK(std::abs(c + b / 0.5 - 0.8) <= 1e-6);
  const double t = std::min(a, b) / 0.5;
  CHECK(std::abs(c + t - 0.8) <= 1e-6);
  CHECK(std::abs(a - 0.5 * t - 0.2) <= 1e-6);
  CHECK(std::abs(b - 0.5 * t) <= 1e-6);

  const MarketSet m = running();
  const auto r = optimize_ticket_space(m);
  CHECK(std::abs(r.objective - parlay_growth(m)) <= 1e-9);
  CHECK(r.objective <= parlay_growth(m) + 1e-11);
  CHECK(std::abs(r.book.total() - 1.0) <= 1e-12);

  const MarketSet fair = validate_markets({event("a", {0.5, 0.5}, {0.5, 0.5}), event("b", {0.3, 0.7}, {0.3, 0.7})});
  CHECK(std::abs(optimize_ticket_space(fair).objective) <= 1e-10);

  TicketOracleOptions tight;
  tight.max_iter = 3;
  CHECK_THROWS_AS(optimize_ticket_space(m, tight), NonConvergenceError);
  TicketOracleOptions small;
  small.ticket_cap = 11;
  CHECK_THROWS_AS(optimize_ticket_space(m, small), MenuTooLargeError);
}
