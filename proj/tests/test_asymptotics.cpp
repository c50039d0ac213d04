#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "parlay_kelly/asymptotics.hpp"
#include "parlay_kelly/errors.hpp"

using namespace parlay_kelly;

namespace {

PerturbationFamily binary_pair() { return build_family({{{0.5, 0.5}, {0.1, -0.1}}, {{0.5, 0.5}, {0.1, -0.1}}}); }

}  // namespace

TEST_CASE("family construction") {
  const auto f = build_family({{{0.5, 0.5}, {0.1, -0.1}}});
  REQUIRE(f.events.size() == 1);
  CHECK(f.events[0].support == std::vector<std::size_t>{0});
  // p_2 = 0.5 - 0.1 eps reaches 0.001 at eps = 4.99.
  CHECK(f.eps_max == doctest::Approx(4.99));
  const MarketSet m = f.markets_at(0.5);
  CHECK(m[0].name == "e1");
  CHECK(m[0].probs[0] == doctest::Approx(0.55));
  CHECK(m[0].prices == std::vector<double>{0.5, 0.5});

  CHECK(build_family({{{0.4, 0.35, 0.25}, {0.2, -0.05, -0.15}}}).events[0].support == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(build_family({{{0.45, 0.35, 0.25}, {0.1, 0.0, -0.1}}}), ValidationError);
  CHECK_THROWS_AS(build_family({{{0.5, 0.5}, {0.1, -0.05}}}), ValidationError);
  CHECK_THROWS_AS(build_family({{{0.5, 0.5}, {0.0, 0.0}}}), ValidationError);
  CHECK_THROWS_AS(build_family({}), ValidationError);
}

TEST_CASE("coefficients of the binary family") {
  const auto c = coefficients(binary_pair());
  CHECK(c.a[0](0) == doctest::Approx(0.2));
  CHECK(c.C[0](0, 0) == doctest::Approx(1.0));
  CHECK(c.alpha[0](0) == doctest::Approx(0.2));
  CHECK(c.lambda[0] == doctest::Approx(0.04));
  CHECK(c.lambda[1] == doctest::Approx(0.04));
}

TEST_CASE("coefficient identities on a mixed family") {
  const auto f = build_family({{{0.5, 0.5}, {0.1, -0.1}},
                               {{0.4, 0.35, 0.25}, {0.1, 0.05, -0.15}},
                               {{0.2, 0.3, 0.5}, {0.1, -0.0375, -0.0625}}});
  const auto c = coefficients(f);
  double total = 0.0;
  for (std::size_t j = 0; j < 3; ++j) total += c.quadratic[j];
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK((c.C[j] * c.alpha[j] - c.a[j]).norm() <= 1e-10);
    CHECK((c.C[j] - c.C[j].transpose()).norm() == 0.0);
    CHECK(c.lambda[j] >= 0.0);
    CHECK(c.lambda[j] + c.quadratic[j] == doctest::Approx(total).epsilon(1e-14));
  }
}

TEST_CASE("a vanishing tilt adds a vanishing amount to the other events") {
  // A zero direction has no support and is rejected outright.
  const auto c = coefficients(build_family({{{0.5, 0.5}, {0.1, -0.1}}, {{0.5, 0.5}, {1e-9, -1e-9}}}));
  CHECK(c.lambda[0] == doctest::Approx(4e-18).epsilon(1e-9));
  CHECK(c.lambda[1] == doctest::Approx(0.04));
}

TEST_CASE("isolated stakes") {
  const auto f = build_family({{{0.5, 0.5}, {0.1, -0.1}}});
  const auto s = isolated_stakes(f, 0.5);
  CHECK(s.restricted[0](0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s.full[0][1] == 0.0);
  CHECK(s.all_match());

  const auto c = coefficients(f);
  for (double eps : {0.01, 0.1, 1.0}) {
    CHECK(std::abs(isolated_stakes(f, eps).restricted[0](0) / eps - c.alpha[0](0)) <= 1e-13);
  }

  // The declared support {1} never activates when the tilt is reversed.
  const auto flipped = build_family({{{0.5, 0.5}, {-0.1, 0.1}}});
  CHECK(flipped.events[0].support == std::vector<std::size_t>{1});
  // Outcome 2 of this ternary tilt has d/pi above the inactive one's, so it
  // joins the active set even though its direction entry is negative.
  const auto mismatch = build_family({{{0.4, 0.35, 0.25}, {0.2, -0.05, -0.15}}});
  CHECK_FALSE(isolated_stakes(mismatch, 0.5).all_match());
}

TEST_CASE("simultaneous stakes") {
  const auto f = binary_pair();
  // m = 0.2 eps = 0.1 on both events.
  const auto s = simultaneous_stakes(f, 0.5);
  const double want = 0.1 * (1 - 0.01) / (1 - 0.0001);
  CHECK(std::abs(s.restricted[0](0) - want) <= 1e-12);
  CHECK(std::abs(s.restricted[1](0) - want) <= 1e-12);
  CHECK(s.restricted[0](0) == doctest::Approx(0.0990099).epsilon(1e-6));

  const auto single = build_family({{{0.4, 0.35, 0.25}, {0.1, 0.05, -0.15}}});
  const auto a = simultaneous_stakes(single, 0.3);
  const auto b = isolated_stakes(single, 0.3);
  CHECK((a.restricted[0] - b.restricted[0]).norm() <= 1e-10);
}

TEST_CASE("score residual at the isolated stakes") {
  const auto single = build_family({{{0.4, 0.35, 0.25}, {0.1, 0.05, -0.15}}});
  CHECK(kkt_residual_at_isolated(single, 0.4).residual[0].norm() <= 1e-12);

  const auto f = binary_pair();
  const auto c = coefficients(f);
  const double eps = 0.05;
  const auto r = kkt_residual_at_isolated(f, eps);
  const double want = -c.lambda[0] * c.a[0](0) * std::pow(eps, 3);
  CHECK(r.predicted[0](0) == doctest::Approx(want));
  CHECK(std::abs(r.residual[0](0) / want - 1.0) <= 0.01);
}

TEST_CASE("order estimation") {
  std::vector<double> xs{0.01, 0.02, 0.04, 0.08, 0.16};
  std::vector<double> cube, quart, noisy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cube.push_back(std::pow(xs[i], 3));
    quart.push_back(5 * std::pow(xs[i], 4));
    noisy.push_back(std::pow(xs[i], 3) * (1 + 0.01 * (i % 2 ? -1 : 1)));
  }
  const auto a = estimate_order(xs, cube);
  CHECK(a.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
  const auto b = estimate_order(xs, quart);
  CHECK(b.slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(b.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(std::abs(estimate_order(xs, noisy).slope - 3.0) <= 0.05);

  CHECK_THROWS_AS(estimate_order({1, 2}, {1, 2}), OrderEstimationError);
  CHECK_THROWS_AS(estimate_order({1, 2, 3}, {1, 0, 2}), OrderEstimationError);
  CHECK_THROWS_AS(estimate_order({1, 2, 3}, {1, -1, 2}), OrderEstimationError);
}

TEST_CASE("grids") {
  const auto f = binary_pair();
  const auto g = default_grid(f);
  REQUIRE(g.size() == 6);
  CHECK(g.back() == doctest::Approx(0.2 * f.eps_max));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(1.5));
  CHECK(sextic_grid(f).back() > g.back());
}

TEST_CASE("binary-binary sweep") {
  const auto r = shrinkage_sweep(binary_pair());
  CHECK(r.valid_records == 6);
  CHECK(r.delta_order.slope >= 2.85);
  CHECK(r.delta_order.slope <= 3.15);
  CHECK(r.gap_order.slope >= 3.8);
  CHECK(r.gap_order.slope <= 4.2);
  CHECK(r.min_gap >= -1e-11);
  CHECK(r.min_test_point_slack >= -1e-11);
  REQUIRE(r.sextic_order.has_value());
  CHECK(r.sextic_order->slope >= 5.4);
  CHECK(r.sextic_order->slope <= 6.6);
  CHECK(std::abs(r.shrinkage_ratio[0](0) - 1.0) <= 0.1);
  CHECK(r.isolated_ray_error <= 1e-12);

  // Exact pair on the symmetric family.
  for (const auto& rec : r.records) {
    const double m = 0.2 * rec.eps;
    const double f1 = thorp_exact(m, m).first;
    CHECK(std::abs(rec.x_sim[0](0) - f1) <= 1e-10);
  }

  SweepOptions tiny;
  tiny.sextic_grid = {1e-4, 2e-4, 4e-4, 8e-4};
  const auto s = shrinkage_sweep(binary_pair(), tiny);
  CHECK(s.sextic_skipped);
  CHECK_FALSE(s.sextic_order.has_value());

  SweepOptions bad;
  bad.grid = {0.1, 0.2, 100.0};
  CHECK_THROWS_AS(shrinkage_sweep(binary_pair(), bad), ValidationError);
}

TEST_CASE("too few supported records is a sweep error") {
  const auto mismatch = build_family({{{0.4, 0.35, 0.25}, {0.2, -0.05, -0.15}}, {{0.5, 0.5}, {0.1, -0.1}}});
  CHECK_THROWS_AS(shrinkage_sweep(mismatch), SweepError);
}

TEST_CASE("sweep records do not depend on the worker count") {
  const auto f = build_family({{{0.5, 0.5}, {0.1, -0.1}}, {{0.4, 0.35, 0.25}, {0.1, 0.05, -0.15}}});
  ::setenv("PARLAY_KELLY_THREADS", "1", 1);
  CHECK(configured_threads() == 1);
  const auto a = shrinkage_sweep(f);
  ::setenv("PARLAY_KELLY_THREADS", "3", 1);
  const auto b = shrinkage_sweep(f);
  ::unsetenv("PARLAY_KELLY_THREADS");
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].eps == b.records[i].eps);
    CHECK(a.records[i].gap == b.records[i].gap);
    CHECK(a.records[i].x_sim[1] == b.records[i].x_sim[1]);
  }
  CHECK(a.delta_order.slope == b.delta_order.slope);
}
