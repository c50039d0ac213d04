#include "parlay_kelly/singles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parlay_kelly/errors.hpp"
#include "parlay_kelly/single_event.hpp"

namespace parlay_kelly {

double excess_return(const Event& event, std::size_t occurred, std::size_t coord) {
  if (occurred >= event.size() || coord >= event.size()) {
    throw std::out_of_range("excess_return index out of range for event '" + event.name + "'");
  }
  return (occurred == coord ? 1.0 / event.prices[coord] : 0.0) - 1.0;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
  std::vector<std::size_t> offset;
  std::size_t dim = 0;

  explicit Layout(const MarketSet& markets) {
    for (const auto& e : markets.events) {
      offset.push_back(dim);
      dim += e.size();
    }
  }
};

VectorXd flatten(const Layout& layout, const MarketSet& markets, const StakeVectors& stakes) {
  if (stakes.size() != markets.size()) throw std::invalid_argument("stake vectors do not match market set");
  VectorXd x(static_cast<Eigen::Index>(layout.dim));
  for (std::size_t j = 0; j < markets.size(); ++j) {
    if (stakes[j].size() != markets[j].size()) {
      throw std::invalid_argument("stake vector for event '" + markets[j].name + "' has wrong length");
    }
    for (std::size_t k = 0; k < stakes[j].size(); ++k) x[static_cast<Eigen::Index>(layout.offset[j] + k)] = stakes[j][k];
  }
  return x;
}

StakeVectors unflatten(const Layout& layout, const MarketSet& markets, const VectorXd& x) {
  StakeVectors stakes(markets.size());
  for (std::size_t j = 0; j < markets.size(); ++j) {
    stakes[j].resize(markets[j].size());
    for (std::size_t k = 0; k < stakes[j].size(); ++k) stakes[j][k] = x[static_cast<Eigen::Index>(layout.offset[j] + k)];
  }
  return stakes;
}

std::string describe_outcome(const MarketSet& markets, const std::vector<int>& outcome) {
  std::string s = "(";
  for (std::size_t l = 0; l < outcome.size(); ++l) {
    if (l) s += ", ";
    s += markets[l].name + "=" + markets[l].labels[static_cast<std::size_t>(outcome[l])];
  }
  return s + ")";
}

// Coordinates on the simplex: y[0] is cash, y[1 + offset_j + k] the stake on
// outcome k of event j. Wealth is y[0] + sum_j y[1 + offset_j + I_j] / price.
struct Evaluation {
  bool feasible = true;
  std::vector<int> bad_outcome;
  double objective = 0.0;
  double min_wealth = std::numeric_limits<double>::infinity();
  VectorXd grad;  // E[a / W]
  MatrixXd hess;  // -E[a a' / W^2]
};

enum class Order { kValue, kGradient, kHessian };

VectorXd with_cash(const VectorXd& x) {
  VectorXd y(x.size() + 1);
  y[0] = 1.0 - x.sum();
  y.tail(x.size()) = x;
  return y;
}

// One exact pass over the joint outcome space.
Evaluation evaluate(const MarketSet& markets, const Layout& layout, const VectorXd& y, Order order,
                    std::size_t state_cap) {
  const std::size_t m = markets.size();
  const auto n = static_cast<Eigen::Index>(layout.dim + 1);
  Evaluation ev;
  const bool need_grad = order != Order::kValue;
  const bool need_hess = order == Order::kHessian;
  if (need_grad) ev.grad = VectorXd::Zero(n);
  if (need_hess) ev.hess = MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> idx(m + 1, 0);
  std::vector<double> coef(m + 1, 1.0);

  for_each_joint_outcome(markets, state_cap, [&](const std::vector<int>& outcome, double prob) {
    if (!ev.feasible) return;
    double wealth = y[0];
    for (std::size_t j = 0; j < m; ++j) {
      const auto i = static_cast<std::size_t>(outcome[j]);
      idx[j + 1] = static_cast<Eigen::Index>(1 + layout.offset[j] + i);
      coef[j + 1] = 1.0 / markets[j].prices[i];
      wealth += y[idx[j + 1]] * coef[j + 1];
    }
    if (!(wealth > 0.0)) {
      ev.feasible = false;
      ev.bad_outcome = outcome;
      return;
    }
    ev.objective += prob * std::log(wealth);
    ev.min_wealth = std::min(ev.min_wealth, wealth);
    if (need_grad) {
      const double w1 = prob / wealth;
      for (std::size_t a = 0; a <= m; ++a) ev.grad[idx[a]] += w1 * coef[a];
    }
    if (need_hess) {
      const double w2 = prob / (wealth * wealth);
      for (std::size_t a = 0; a <= m; ++a) {
        for (std::size_t b = 0; b <= m; ++b) ev.hess(idx[a], idx[b]) -= w2 * coef[a] * coef[b];
      }
    }
  });
  return ev;
}

// The largest holding serves as the reference whose mass absorbs the budget;
// the others are then only bounded below. Ties go to the lowest index.
Eigen::Index reference(const VectorXd& y) {
  Eigen::Index r = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (y[i] > y[r]) r = i;
  }
  return r;
}

double kkt_residual(const VectorXd& y, const VectorXd& grad) {
  const double level = grad[reference(y)];
  double res = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double g = grad[i] - level;
    res = std::max(res, y[i] > 0.0 ? std::abs(g) : std::max(g, 0.0));
  }
  return res;
}

// Projected Newton direction in the coordinates other than the reference,
// using a pseudo-inverse of the reduced negative Hessian on the free set.
VectorXd newton_direction(const VectorXd& y, const VectorXd& grad, const MatrixXd& hess) {
  const Eigen::Index r = reference(y);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (i != r && (y[i] > 0.0 || grad[i] > grad[r])) free.push_back(i);
  }
  VectorXd dir = VectorXd::Zero(y.size());
  if (free.empty()) return dir;
  const auto nf = static_cast<Eigen::Index>(free.size());
  MatrixXd neg_h(nf, nf);
  VectorXd g(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    const Eigen::Index i = free[static_cast<std::size_t>(a)];
    g[a] = grad[i] - grad[r];
    for (Eigen::Index b = 0; b < nf; ++b) {
      const Eigen::Index k = free[static_cast<std::size_t>(b)];
      neg_h(a, b) = -(hess(i, k) - hess(i, r) - hess(r, k) + hess(r, r));
    }
  }
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(neg_h);
  const VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  const VectorXd coeffs = eig.eigenvectors().transpose() * g;
  VectorXd step = VectorXd::Zero(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    if (vals[k] > cutoff) step += eig.eigenvectors().col(k) * (coeffs[k] / vals[k]);
  }
  for (Eigen::Index a = 0; a < nf; ++a) dir[free[static_cast<std::size_t>(a)]] = step[a];
  dir[r] = -step.sum();
  return dir;
}

// Multiplicative update, which stays on the simplex and keeps wealth positive.
// Zero coordinates get a tiny floor so they can re-enter.
VectorXd mirror_step(const VectorXd& y, const VectorXd& grad) {
  constexpr double kFloor = 1e-14;
  const VectorXd next = y.cwiseMax(kFloor).cwiseProduct(grad);
  return next / next.sum();
}

constexpr double kDust = 1e-14;

bool is_fair(const Event& e) { return std::abs(overround(e) - 1.0) <= 1e-12; }

// For a fair event, adding t * prices to its stakes leaves wealth unchanged;
// shift so the smallest stake-to-price ratio is zero.
void canonicalize(const MarketSet& markets, const Layout& layout, VectorXd& x) {
  for (std::size_t j = 0; j < markets.size(); ++j) {
    const Event& e = markets[j];
    if (!is_fair(e)) continue;
    double t = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double ratio = x[static_cast<Eigen::Index>(layout.offset[j] + k)] / e.prices[k];
      if (ratio < t) {
        t = ratio;
        argmin = k;
      }
    }
    if (!(t > 0.0)) continue;
    for (std::size_t k = 0; k < e.size(); ++k) {
      auto& v = x[static_cast<Eigen::Index>(layout.offset[j] + k)];
      v = k == argmin ? 0.0 : std::max(v - t * e.prices[k], 0.0);
    }
  }
}

void require_feasible(const MarketSet& markets, const Evaluation& ev) {
  if (!ev.feasible) {
    throw InfeasibleStakesError("singles stakes leave nonpositive wealth in joint outcome " +
                                describe_outcome(markets, ev.bad_outcome));
  }
}

}  // namespace

double singles_objective(const MarketSet& markets, const StakeVectors& stakes, std::size_t state_cap) {
  const Layout layout(markets);
  const VectorXd y = with_cash(flatten(layout, markets, stakes));
  const Evaluation ev = evaluate(markets, layout, y, Order::kValue, state_cap);
  require_feasible(markets, ev);
  return ev.objective;
}

StakeVectors singles_score(const MarketSet& markets, const StakeVectors& stakes, std::size_t state_cap) {
  const Layout layout(markets);
  const VectorXd y = with_cash(flatten(layout, markets, stakes));
  const Evaluation ev = evaluate(markets, layout, y, Order::kGradient, state_cap);
  require_feasible(markets, ev);
  // Moving stake out of cash.
  return unflatten(layout, markets, VectorXd(ev.grad.tail(y.size() - 1).array() - ev.grad[0]));
}

SinglesSolution optimize_singles(const MarketSet& markets, const SinglesOptions& options) {
  const Layout layout(markets);
  VectorXd x;
  if (options.initial) {
    x = flatten(layout, markets, *options.initial).cwiseMax(0.0);
  } else {
    x = VectorXd::Zero(static_cast<Eigen::Index>(layout.dim));
    for (std::size_t j = 0; j < markets.size(); ++j) {
      try {
        const auto sol = solve_single_event(markets[j]);
        for (std::size_t k = 0; k < sol.stakes.size(); ++k) {
          x[static_cast<Eigen::Index>(layout.offset[j] + k)] = sol.stakes[k];
        }
      } catch (const NoPositiveCashError&) {
        // leave this event at zero
      }
    }
  }
  // Isolated stakes can overspend jointly; start halfway inside the budget so
  // no joint outcome begins with near-zero wealth.
  if (x.sum() > 1.0) x *= 0.5 / x.sum();
  VectorXd y = with_cash(x);
  if (!evaluate(markets, layout, y, Order::kValue, options.state_cap).feasible) y = with_cash(x.setZero());

  SinglesSolution result;
  bool converged = false;
  Evaluation ev;
  for (std::size_t iter = 0; iter <= options.max_iter; ++iter) {
    ev = evaluate(markets, layout, y, Order::kHessian, options.state_cap);
    result.iterations = iter;
    if (kkt_residual(y, ev.grad) <= options.tol) {
      converged = true;
      break;
    }
    if (iter == options.max_iter) break;

    const Eigen::Index r = reference(y);
    const VectorXd dir = newton_direction(y, ev.grad, ev.hess);
    bool accepted = false;
    if (ev.grad.dot(dir) > 0.0) {
      const double slack = 1e-15 * (1.0 + std::abs(ev.objective));
      double t = 1.0;
      for (int attempt = 0; attempt < 60 && !accepted; ++attempt, t *= 0.5) {
        VectorXd trial = (y + t * dir).cwiseMax(0.0);
        trial[r] = 0.0;
        trial[r] = 1.0 - trial.sum();
        if (!(trial[r] > 0.0)) continue;
        const Evaluation tv = evaluate(markets, layout, trial, Order::kValue, options.state_cap);
        // Cutting the poorest state's wealth tenfold in one step leaves the
        // quadratic model's trust region; shorten instead.
        if (!tv.feasible || tv.min_wealth < 0.1 * ev.min_wealth) continue;
        if (tv.objective >= ev.objective + 1e-4 * ev.grad.dot(trial - y) - slack) {
          y = trial;
          accepted = true;
        }
      }
    }
    if (!accepted) {
      y = mirror_step(y, ev.grad);
      ++result.mirror_steps;
    }
  }
  if (!converged) {
    throw NonConvergenceError("singles optimizer did not reach KKT residual " + std::to_string(options.tol) +
                              " within " + std::to_string(options.max_iter) + " iterations");
  }

  x = y.tail(y.size() - 1);
  canonicalize(markets, layout, x);
  y = with_cash(x);
  ev = evaluate(markets, layout, y, Order::kGradient, options.state_cap);
  // Round-off dust on coordinates whose bound is KKT-consistent goes to exact zero.
  bool cleaned = false;
  const double level = ev.grad[reference(y)];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && x[i] <= kDust && ev.grad[i + 1] - level <= options.tol) {
      x[i] = 0.0;
      cleaned = true;
    }
  }
  if (cleaned) {
    y = with_cash(x);
    ev = evaluate(markets, layout, y, Order::kGradient, options.state_cap);
  }
  result.stakes = unflatten(layout, markets, x);
  result.cash = std::max(0.0, y[0]);
  result.objective = ev.objective;
  result.kkt_residual = kkt_residual(y, ev.grad);
  return result;
}

TicketOracleResult optimize_ticket_space(const MarketSet& markets, const TicketOracleOptions& options) {
  const TicketIndex index(markets, options.ticket_cap);
  const std::size_t size = index.size();
  std::vector<double> prices(size);
  for (std::size_t k = 0; k < size; ++k) prices[k] = ticket_price(index.ticket(k), markets);

  // Compatible-ticket table per joint outcome.
  const std::size_t m = markets.size();
  const std::size_t masks = std::size_t{1} << m;
  std::vector<double> probs;
  std::vector<std::size_t> compatible;
  for_each_joint_outcome(markets, options.state_cap, [&](const std::vector<int>& outcome, double prob) {
    probs.push_back(prob);
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::size_t idx = 0;
      for (std::size_t l = 0; l < m; ++l) {
        if (mask & (std::size_t{1} << (m - 1 - l))) idx += static_cast<std::size_t>(outcome[l] + 1) * index.stride(l);
      }
      compatible.push_back(idx);
    }
  });

  std::vector<double> x(size, 1.0 / static_cast<double>(size));
  std::vector<double> grad(size);
  TicketOracleResult result;
  auto compute = [&]() {
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      const std::size_t* row = compatible.data() + s * masks;
      double wealth = 0.0;
      for (std::size_t a = 0; a < masks; ++a) wealth += x[row[a]] / prices[row[a]];
      objective += probs[s] * std::log(wealth);
      const double weight = probs[s] / wealth;
      for (std::size_t a = 0; a < masks; ++a) grad[row[a]] += weight / prices[row[a]];
    }
    return objective;
  };

  bool converged = false;
  for (std::size_t iter = 0; iter <= options.max_iter; ++iter) {
    result.objective = compute();
    result.iterations = iter;
    result.max_gradient = *std::max_element(grad.begin(), grad.end());
    result.support_residual = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      if (x[k] > options.support_floor) result.support_residual = std::max(result.support_residual, std::abs(grad[k] - 1.0));
    }
    if (result.max_gradient - 1.0 <= options.tol && result.support_residual <= options.tol) {
      converged = true;
      break;
    }
    if (iter == options.max_iter) break;
    double total = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      x[k] *= grad[k];
      total += x[k];
    }
    for (double& v : x) v /= total;
  }
  if (!converged) {
    throw NonConvergenceError("ticket-space oracle did not converge within " + std::to_string(options.max_iter) +
                              " iterations (max gradient " + std::to_string(result.max_gradient) + ")");
  }
  for (std::size_t k = 0; k < size; ++k) {
    if (x[k] > 0.0) result.book.stakes.emplace(index.ticket(k), x[k]);
  }
  return result;
}

GrowthGapReport growth_gap(const MarketSet& markets, const SinglesOptions& options) {
  GrowthGapReport report;
  report.v_par = parlay_growth(markets);
  report.v_sing = optimize_singles(markets, options).objective;
  report.gap = report.v_par - report.v_sing;
  return report;
}

}  // namespace parlay_kelly
