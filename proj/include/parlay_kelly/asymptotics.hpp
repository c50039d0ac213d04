#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "parlay_kelly/market.hpp"
#include "parlay_kelly/singles.hpp"

namespace parlay_kelly {

/// One event of a low-edge family: fair prices held fixed and probabilities
/// tilted linearly, p(eps) = baseline + eps * direction.
struct FamilyEvent {
  std::vector<double> baseline;
  std::vector<double> direction;
  std::vector<std::size_t> support;  // {i : direction_i > 0}
};

struct PerturbationFamily {
  std::vector<FamilyEvent> events;
  double eps_max = 0.0;

  /// Markets at a given edge parameter; event names are e1, e2, ...
  MarketSet markets_at(double eps) const;
};

/// Validates the baselines (fair) and directions (balanced, proper nonempty
/// support). eps_max is the largest eps keeping every p_i(eps) in [0.001, 0.999].
PerturbationFamily build_family(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& entries);

/// Local expansion coefficients on each declared support.
struct AsymptoticCoefficients {
  std::vector<Eigen::VectorXd> a;       // d_i / pi_i
  std::vector<Eigen::MatrixXd> C;       // diag(1/pi) - 1 1^T
  std::vector<Eigen::VectorXd> alpha;   // C^{-1} a
  std::vector<double> lambda;           // sum over the other events of a^T C^{-1} a
  std::vector<double> quadratic;        // a^T C^{-1} a for this event
};

AsymptoticCoefficients coefficients(const PerturbationFamily& family);

/// Stakes restricted to each event's declared support, plus whether the
/// realized support (positive stakes) matched it.
struct BlockStakes {
  std::vector<Eigen::VectorXd> restricted;
  StakeVectors full;
  std::vector<bool> support_match;

  bool all_match() const;
};

/// Closed-form isolated Kelly stakes at p(eps).
BlockStakes isolated_stakes(const PerturbationFamily& family, double eps);

/// Singles-only simultaneous optimum at p(eps).
BlockStakes simultaneous_stakes(const PerturbationFamily& family, double eps, double tol = 1e-12);

struct ResidualAtIsolated {
  std::vector<Eigen::VectorXd> residual;    // singles score F_j at the isolated stakes, on A_j
  std::vector<Eigen::VectorXd> predicted;   // -Lambda_j a_j eps^3
};

ResidualAtIsolated kkt_residual_at_isolated(const PerturbationFamily& family, double eps);

struct SweepRecord {
  double eps = 0.0;
  std::vector<Eigen::VectorXd> x_ind;
  std::vector<Eigen::VectorXd> x_sim;
  std::vector<Eigen::VectorXd> delta;
  std::vector<Eigen::VectorXd> predicted_delta;
  std::vector<Eigen::VectorXd> residual;
  std::vector<Eigen::VectorXd> predicted_residual;
  double v_par = 0.0;
  double v_sing = 0.0;
  double gap = 0.0;
  double singles_value_at_isolated = 0.0;
  bool support_ok = true;
};

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares on (log x, log y). Needs >= 3 points, all positive.
OrderFit estimate_order(const std::vector<double>& xs, const std::vector<double>& ys);

struct SweepOptions {
  std::vector<double> grid;         // empty: default_grid(family)
  std::vector<double> sextic_grid;  // empty: sextic_grid(family)
  double tol = 1e-12;
  double noise_floor = 1e-12;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SweepRecord> sextic_records;
  std::size_t valid_records = 0;

  OrderFit delta_order;                    // ||x_sim - x_ind||, expected 3
  std::vector<OrderFit> delta_order_by_event;
  OrderFit gap_order;                      // V_par - V_sing, expected 4
  OrderFit residual_order;                 // ||F(x_ind)||, expected 3
  std::vector<OrderFit> residual_order_by_event;
  /// max over records of ||x_ind - alpha eps|| / eps. The linear-tilt family
  /// makes the isolated stakes exactly linear, so this sits at round-off level.
  double isolated_ray_error = 0.0;
  /// Fit of ||x_ind - alpha eps||, only when it rises above round-off (expected >= 2).
  std::optional<OrderFit> isolated_ray_order;
  std::optional<OrderFit> sextic_order;    // G(x_sim) - G(x_ind), expected 6; empty when below noise floor
  bool sextic_skipped = false;

  /// delta_j / (-Lambda_j alpha_j eps^3) per event and coordinate at the smallest valid eps.
  std::vector<Eigen::VectorXd> shrinkage_ratio;
  /// ||F_j(x_ind)|| / ||Lambda_j a_j eps^3|| per event at the smallest valid eps.
  std::vector<double> residual_ratio;
  double min_gap = 0.0;
  /// Smallest slack of V_par - G(x_ind) >= gap over the records (expected >= 0).
  double min_test_point_slack = 0.0;
};

/// Geometric grid: `points` values with ratio `ratio`, largest = top_fraction * eps_max.
std::vector<double> geometric_grid(const PerturbationFamily& family, double top_fraction, double ratio = 1.5,
                                   std::size_t points = 6);
std::vector<double> default_grid(const PerturbationFamily& family);
std::vector<double> sextic_grid(const PerturbationFamily& family);

/// Evaluates one grid point.
SweepRecord sweep_point(const PerturbationFamily& family, const AsymptoticCoefficients& coeffs, double eps,
                        double tol = 1e-12);

/// Runs both grids and fits every order. Grid points are evaluated
/// concurrently (PARLAY_KELLY_THREADS caps the workers); records keep grid order.
SweepResult shrinkage_sweep(const PerturbationFamily& family, const SweepOptions& options = {});

/// Exact two-bet singles-only fractions for independent even-money binaries
/// with mean returns m1, m2.
std::pair<double, double> thorp_exact(double m1, double m2);

/// Worker count from PARLAY_KELLY_THREADS, else hardware concurrency.
std::size_t configured_threads();

}  // namespace parlay_kelly
