#include "parlay_kelly/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "parlay_kelly/errors.hpp"
#include "parlay_kelly/parlay_book.hpp"
#include "parlay_kelly/single_event.hpp"

namespace parlay_kelly {

namespace {

constexpr double kFamilyTolerance = 1e-12;
constexpr double kProbFloor = 0.001;
constexpr double kProbCeiling = 0.999;
constexpr double kRayRoundoff = 1e-13;

Eigen::VectorXd restrict_to(const std::vector<double>& full, const std::vector<std::size_t>& support) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(support.size()));
  for (std::size_t a = 0; a < support.size(); ++a) v[static_cast<Eigen::Index>(a)] = full[support[a]];
  return v;
}

bool support_matches(const std::vector<double>& full, const std::vector<std::size_t>& support) {
  std::vector<std::size_t> realized;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (full[i] > 0.0) realized.push_back(i);
  }
  return realized == support;
}

double stacked_norm(const std::vector<Eigen::VectorXd>& blocks) {
  double sq = 0.0;
  for (const auto& b : blocks) sq += b.squaredNorm();
  return std::sqrt(sq);
}

}  // namespace

MarketSet PerturbationFamily::markets_at(double eps) const {
  std::vector<Event> out;
  for (std::size_t j = 0; j < events.size(); ++j) {
    Event e;
    e.name = "e" + std::to_string(j + 1);
    e.prices = events[j].baseline;
    for (std::size_t i = 0; i < e.prices.size(); ++i) {
      e.probs.push_back(events[j].baseline[i] + eps * events[j].direction[i]);
    }
    out.push_back(std::move(e));
  }
  return validate_markets(std::move(out));
}

PerturbationFamily build_family(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& entries) {
  if (entries.empty()) throw ValidationError("perturbation family needs at least one event");
  PerturbationFamily family;
  family.eps_max = INFINITY;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const auto& [baseline, direction] = entries[j];
    const std::string tag = "family event " + std::to_string(j + 1);
    if (baseline.size() < 2 || baseline.size() != direction.size()) {
      throw ValidationError(tag + ": baseline and direction need equal length >= 2");
    }
    double price_sum = 0.0;
    double direction_sum = 0.0;
    FamilyEvent fe{baseline, direction, {}};
    for (std::size_t i = 0; i < baseline.size(); ++i) {
      if (!std::isfinite(baseline[i]) || baseline[i] <= kProbFloor || baseline[i] >= kProbCeiling) {
        throw ValidationError(tag + ": baseline entries must lie in (0.001, 0.999)");
      }
      if (!std::isfinite(direction[i])) throw ValidationError(tag + ": direction must be finite");
      price_sum += baseline[i];
      direction_sum += direction[i];
      if (direction[i] > 0.0) {
        fe.support.push_back(i);
        family.eps_max = std::min(family.eps_max, (kProbCeiling - baseline[i]) / direction[i]);
      } else if (direction[i] < 0.0) {
        family.eps_max = std::min(family.eps_max, (baseline[i] - kProbFloor) / -direction[i]);
      }
    }
    if (std::abs(price_sum - 1.0) > kFamilyTolerance) {
      throw ValidationError(tag + ": baseline must be fair (sum " + std::to_string(price_sum) + ")");
    }
    if (std::abs(direction_sum) > kFamilyTolerance) {
      throw ValidationError(tag + ": direction must sum to zero");
    }
    if (fe.support.empty() || fe.support.size() == baseline.size()) {
      throw ValidationError(tag + ": support {i : direction_i > 0} must be a nonempty proper subset");
    }
    family.events.push_back(std::move(fe));
  }
  return family;
}

AsymptoticCoefficients coefficients(const PerturbationFamily& family) {
  AsymptoticCoefficients c;
  for (const auto& fe : family.events) {
    const auto k = static_cast<Eigen::Index>(fe.support.size());
    Eigen::VectorXd a(k);
    Eigen::MatrixXd C = Eigen::MatrixXd::Constant(k, k, -1.0);
    for (Eigen::Index r = 0; r < k; ++r) {
      const std::size_t i = fe.support[static_cast<std::size_t>(r)];
      a[r] = fe.direction[i] / fe.baseline[i];
      C(r, r) += 1.0 / fe.baseline[i];
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) {
      throw SolverError("second-moment matrix is not positive definite on the declared support");
    }
    Eigen::VectorXd alpha = llt.solve(a);
    c.quadratic.push_back(a.dot(alpha));
    c.a.push_back(std::move(a));
    c.C.push_back(std::move(C));
    c.alpha.push_back(std::move(alpha));
  }
  const double total = std::accumulate(c.quadratic.begin(), c.quadratic.end(), 0.0);
  for (double q : c.quadratic) c.lambda.push_back(total - q);
  return c;
}

bool BlockStakes::all_match() const {
  return std::all_of(support_match.begin(), support_match.end(), [](bool b) { return b; });
}

BlockStakes isolated_stakes(const PerturbationFamily& family, double eps) {
  const MarketSet markets = family.markets_at(eps);
  BlockStakes out;
  for (std::size_t j = 0; j < family.events.size(); ++j) {
    const auto sol = solve_single_event(markets[j]);
    out.restricted.push_back(restrict_to(sol.stakes, family.events[j].support));
    out.support_match.push_back(support_matches(sol.stakes, family.events[j].support));
    out.full.push_back(sol.stakes);
  }
  return out;
}

BlockStakes simultaneous_stakes(const PerturbationFamily& family, double eps, double tol) {
  const MarketSet markets = family.markets_at(eps);
  SinglesOptions options;
  options.tol = tol;
  const auto sol = optimize_singles(markets, options);
  BlockStakes out;
  for (std::size_t j = 0; j < family.events.size(); ++j) {
    out.restricted.push_back(restrict_to(sol.stakes[j], family.events[j].support));
    out.support_match.push_back(support_matches(sol.stakes[j], family.events[j].support));
    out.full.push_back(sol.stakes[j]);
  }
  return out;
}

ResidualAtIsolated kkt_residual_at_isolated(const PerturbationFamily& family, double eps) {
  const MarketSet markets = family.markets_at(eps);
  const auto coeffs = coefficients(family);
  const auto iso = isolated_stakes(family, eps);
  const auto score = singles_score(markets, iso.full);
  ResidualAtIsolated out;
  for (std::size_t j = 0; j < family.events.size(); ++j) {
    out.residual.push_back(restrict_to(score[j], family.events[j].support));
    out.predicted.push_back(-coeffs.lambda[j] * coeffs.a[j] * eps * eps * eps);
  }
  return out;
}

OrderFit estimate_order(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw OrderEstimationError("order estimation needs at least 3 paired points");
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw OrderEstimationError("order estimation needs positive values (point " + std::to_string(i) +
                                 "); shrink the grid");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw OrderEstimationError("order estimation needs distinct x values");
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<double> geometric_grid(const PerturbationFamily& family, double top_fraction, double ratio,
                                   std::size_t points) {
  std::vector<double> grid(points);
  double eps = top_fraction * family.eps_max;
  for (std::size_t k = points; k-- > 0;) {
    grid[k] = eps;
    eps /= ratio;
  }
  return grid;
}

std::vector<double> default_grid(const PerturbationFamily& family) { return geometric_grid(family, 0.2); }

std::vector<double> sextic_grid(const PerturbationFamily& family) { return geometric_grid(family, 0.35); }

SweepRecord sweep_point(const PerturbationFamily& family, const AsymptoticCoefficients& coeffs, double eps,
                        double tol) {
  const MarketSet markets = family.markets_at(eps);
  SweepRecord rec;
  rec.eps = eps;
  const auto iso = isolated_stakes(family, eps);
  SinglesOptions options;
  options.tol = tol;
  const auto sim = optimize_singles(markets, options);
  const auto score = singles_score(markets, iso.full);
  const double eps3 = eps * eps * eps;

  rec.support_ok = iso.all_match();
  for (std::size_t j = 0; j < family.events.size(); ++j) {
    const auto& support = family.events[j].support;
    rec.support_ok = rec.support_ok && support_matches(sim.stakes[j], support);
    rec.x_ind.push_back(iso.restricted[j]);
    rec.x_sim.push_back(restrict_to(sim.stakes[j], support));
    rec.delta.push_back(rec.x_sim.back() - rec.x_ind.back());
    rec.predicted_delta.push_back(-coeffs.lambda[j] * coeffs.alpha[j] * eps3);
    rec.residual.push_back(restrict_to(score[j], support));
    rec.predicted_residual.push_back(-coeffs.lambda[j] * coeffs.a[j] * eps3);
  }
  rec.v_par = parlay_growth(markets);
  rec.v_sing = sim.objective;
  rec.gap = rec.v_par - rec.v_sing;
  rec.singles_value_at_isolated = singles_objective(markets, iso.full);
  return rec;
}

std::size_t configured_threads() {
  if (const char* env = std::getenv("PARLAY_KELLY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<SweepRecord> run_grid(const PerturbationFamily& family, const AsymptoticCoefficients& coeffs,
                                  const std::vector<double>& grid, double tol) {
  for (double eps : grid) {
    if (!(eps > 0.0) || eps > family.eps_max) {
      throw ValidationError("sweep grid point " + std::to_string(eps) + " outside (0, eps_max]");
    }
  }
  std::vector<SweepRecord> records(grid.size());
  const std::size_t workers = std::min(configured_threads(), grid.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) records[k] = sweep_point(family, coeffs, grid[k], tol);
    return records;
  }
  std::vector<std::exception_ptr> errors(grid.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < grid.size(); k += workers) {
        try {
          records[k] = sweep_point(family, coeffs, grid[k], tol);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

}  // namespace

SweepResult shrinkage_sweep(const PerturbationFamily& family, const SweepOptions& options) {
  const auto coeffs = coefficients(family);
  const auto grid = options.grid.empty() ? default_grid(family) : options.grid;
  const auto sgrid = options.sextic_grid.empty() ? sextic_grid(family) : options.sextic_grid;

  SweepResult result;
  result.records = run_grid(family, coeffs, grid, options.tol);
  result.sextic_records = run_grid(family, coeffs, sgrid, options.tol);

  std::vector<const SweepRecord*> valid;
  for (const auto& r : result.records) {
    if (r.support_ok) valid.push_back(&r);
  }
  result.valid_records = valid.size();
  if (valid.size() < 4) {
    throw SweepError("only " + std::to_string(valid.size()) + " sweep records kept the declared support");
  }

  const std::size_t m = family.events.size();
  std::vector<double> eps, delta, gap, residual, ray;
  std::vector<std::vector<double>> delta_j(m), residual_j(m);
  result.min_gap = INFINITY;
  result.min_test_point_slack = INFINITY;
  for (const SweepRecord* r : valid) {
    eps.push_back(r->eps);
    delta.push_back(stacked_norm(r->delta));
    gap.push_back(r->gap);
    residual.push_back(stacked_norm(r->residual));
    std::vector<Eigen::VectorXd> off_ray;
    for (std::size_t j = 0; j < m; ++j) {
      off_ray.push_back(r->x_ind[j] - coeffs.alpha[j] * r->eps);
      delta_j[j].push_back(r->delta[j].norm());
      residual_j[j].push_back(r->residual[j].norm());
    }
    ray.push_back(stacked_norm(off_ray));
    result.min_gap = std::min(result.min_gap, r->gap);
    result.min_test_point_slack =
        std::min(result.min_test_point_slack, (r->v_par - r->singles_value_at_isolated) - r->gap);
  }

  result.delta_order = estimate_order(eps, delta);
  result.gap_order = estimate_order(eps, gap);
  result.residual_order = estimate_order(eps, residual);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    result.isolated_ray_error = std::max(result.isolated_ray_error, ray[k] / eps[k]);
  }
  if (std::all_of(ray.begin(), ray.end(), [](double v) { return v > kRayRoundoff; })) {
    result.isolated_ray_order = estimate_order(eps, ray);
  }
  for (std::size_t j = 0; j < m; ++j) {
    // A single-event family has no cross-event coupling and hence no signal.
    if (coeffs.lambda[j] > 0.0) {
      result.delta_order_by_event.push_back(estimate_order(eps, delta_j[j]));
      result.residual_order_by_event.push_back(estimate_order(eps, residual_j[j]));
    } else {
      result.delta_order_by_event.push_back({});
      result.residual_order_by_event.push_back({});
    }
  }

  const SweepRecord& smallest = *valid.front();
  for (std::size_t j = 0; j < m; ++j) {
    result.shrinkage_ratio.push_back(smallest.delta[j].cwiseQuotient(smallest.predicted_delta[j]));
    result.residual_ratio.push_back(smallest.residual[j].norm() / smallest.predicted_residual[j].norm());
  }

  std::vector<double> seps, sextic;
  bool below_floor = false;
  for (const auto& r : result.sextic_records) {
    if (!r.support_ok) continue;
    const double v = r.v_sing - r.singles_value_at_isolated;
    if (!(v > options.noise_floor)) below_floor = true;
    seps.push_back(r.eps);
    sextic.push_back(v);
  }
  if (below_floor || seps.size() < 3) {
    result.sextic_skipped = true;
  } else {
    result.sextic_order = estimate_order(seps, sextic);
  }
  return result;
}

std::pair<double, double> thorp_exact(double m1, double m2) {
  const double denom = 1.0 - m1 * m1 * m2 * m2;
  return {m1 * (1.0 - m2 * m2) / denom, m2 * (1.0 - m1 * m1) / denom};
}

}  // namespace parlay_kelly
