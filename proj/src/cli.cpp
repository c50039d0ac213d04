#include "parlay_kelly/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "parlay_kelly/asymptotics.hpp"
#include "parlay_kelly/errors.hpp"
#include "parlay_kelly/generator.hpp"
#include "parlay_kelly/io.hpp"
#include "parlay_kelly/parlay_book.hpp"
#include "parlay_kelly/single_event.hpp"
#include "parlay_kelly/singles.hpp"

namespace parlay_kelly::cli {

namespace {

using io::fixed;
using io::json;

const std::vector<std::string> kCommands = {"solve-event", "build-book", "optimize-singles", "optimize-tickets",
                                            "compare",     "verify",     "sweep",            "gen"};

class Renderer {
 public:
  explicit Renderer(const RunConfig& cfg) : cfg_(cfg) {}

  double growth(double nats) const { return cfg_.log2 ? nats / std::log(2.0) : nats; }
  std::string unit() const { return cfg_.log2 ? "bits" : "nats"; }
  std::string growth_text(double nats) const { return fixed(growth(nats), 9) + " " + unit(); }
  std::string stake_text(double stake) const { return fixed(stake < cfg_.min_stake ? 0.0 : stake, 6); }

 private:
  const RunConfig& cfg_;
};

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

MarketSet load_markets(const RunConfig& cfg) { return io::markets_from_json(io::read_json_file(cfg.input)); }

json single_kkt_json(const SingleKktReport& r) {
  return {{"budget_residual", r.budget_residual},
          {"reciprocal_wealth_residual", r.reciprocal_wealth_residual},
          {"active_residual", r.active_residual},
          {"inactive_excess", r.inactive_excess},
          {"pass", r.pass}};
}

json ticket_kkt_json(const TicketKktReport& r, const MarketSet& markets) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"ticket", io::describe_ticket(v.ticket, markets)}, {"stake", v.stake}, {"gradient", v.gradient}});
  }
  return {{"tickets", r.tickets},
          {"support_size", r.support_size},
          {"budget_residual", r.budget_residual},
          {"max_support_residual", r.max_support_residual},
          {"max_off_support_gradient", r.max_off_support_gradient},
          {"pass", r.pass},
          {"strict_pass", r.strict_pass},
          {"violations", std::move(violations)}};
}

void table_ticket_kkt(std::ostream& out, const TicketKktReport& r, const MarketSet& markets) {
  out << "ticket KKT: " << r.tickets << " tickets, support " << r.support_size << ", max |g-1| on support "
      << std::scientific << std::setprecision(3) << r.max_support_residual << ", max g off support "
      << std::fixed << std::setprecision(12) << r.max_off_support_gradient << std::defaultfloat << " -> "
      << (r.pass ? (r.strict_pass ? "pass" : "pass (non-strict off support)") : "FAIL") << '\n';
  for (const auto& v : r.violations) {
    out << "  violation " << io::describe_ticket(v.ticket, markets) << " stake " << fixed(v.stake, 6) << " g "
        << fixed(v.gradient, 12) << '\n';
  }
}

void table_single_kkt(std::ostream& out, const SingleKktReport& r) {
  out << std::scientific << std::setprecision(3) << "  KKT: |E[1/W]-1| " << r.reciprocal_wealth_residual
      << ", active " << r.active_residual << ", inactive excess " << r.inactive_excess << std::defaultfloat
      << " -> " << (r.pass ? "pass" : "FAIL") << '\n';
}

// Marginal allocation of a ticket book on one event: stakes summed over the
// tickets selecting each outcome, cash over the tickets omitting the event.
SingleEventSolution marginal_strategy(const TicketBook& book, const Event& event, std::size_t l) {
  SingleEventSolution sol;
  sol.cash = 0.0;
  sol.stakes.assign(event.size(), 0.0);
  for (const auto& [ticket, stake] : book.stakes) {
    if (ticket.legs[l] == kOmit) {
      sol.cash += stake;
    } else {
      sol.stakes[static_cast<std::size_t>(ticket.legs[l])] += stake;
    }
  }
  for (std::size_t i = 0; i < event.size(); ++i) {
    sol.wealth.push_back(sol.cash + sol.stakes[i] / event.prices[i]);
    if (sol.stakes[i] > 0.0) sol.active_set.push_back(i);
  }
  return sol;
}

int cmd_solve_event(const RunConfig& cfg, std::ostream& out) {
  const MarketSet markets = load_markets(cfg);
  const Renderer r(cfg);
  json events = json::array();
  bool all_pass = true;
  for (const auto& e : markets.events) {
    const auto sol = solve_single_event(e);
    const auto kkt = verify_single_kkt(e, sol);
    all_pass = all_pass && kkt.pass;
    const double g = single_event_growth(e, sol);
    if (cfg.format == Format::kTable) {
      out << "event " << e.name << "  overround " << fixed(overround(e), 6) << '\n';
      out << "  cash " << fixed(sol.cash, 6) << '\n';
      out << "  " << pad("outcome", 10) << pad("prob", 11) << pad("price", 11) << pad("edge", 11) << pad("stake", 11)
          << "wealth\n";
      const auto ratios = edge_ratios(e);
      for (std::size_t i = 0; i < e.size(); ++i) {
        out << "  " << pad(e.labels[i], 10) << pad(fixed(e.probs[i], 6), 11) << pad(fixed(e.prices[i], 6), 11)
            << pad(fixed(ratios[i], 6), 11) << pad(r.stake_text(sol.stakes[i]), 11) << fixed(sol.wealth[i], 6) << '\n';
      }
      out << "  growth " << r.growth_text(g) << '\n';
      table_single_kkt(out, kkt);
    } else if (cfg.format == Format::kCsv) {
      if (&e == &markets.events.front()) out << "event,outcome,prob,price,edge,stake,wealth,cash\n";
      for (std::size_t i = 0; i < e.size(); ++i) {
        out << e.name << ',' << e.labels[i] << ',' << std::setprecision(17) << e.probs[i] << ',' << e.prices[i] << ','
            << e.probs[i] / e.prices[i] << ',' << sol.stakes[i] << ',' << sol.wealth[i] << ',' << sol.cash
            << std::defaultfloat << '\n';
      }
    } else {
      json active = json::array();
      for (std::size_t i : sol.active_set) active.push_back(e.labels[i]);
      events.push_back({{"name", e.name},
                        {"labels", e.labels},
                        {"cash", sol.cash},
                        {"stakes", sol.stakes},
                        {"wealth", sol.wealth},
                        {"active", std::move(active)},
                        {"growth", r.growth(g)},
                        {"kkt", single_kkt_json(kkt)}});
    }
  }
  if (cfg.format == Format::kJson) out << json{{"events", std::move(events)}, {"unit", r.unit()}}.dump() << '\n';
  return all_pass ? kOk : kVerificationFailure;
}

void render_book(const RunConfig& cfg, std::ostream& out, const TicketBook& book, const MarketSet& markets,
                 const std::string& value_name, double value) {
  const Renderer r(cfg);
  if (cfg.format == Format::kJson) {
    json doc = io::book_to_json(book, markets);
    doc[value_name] = r.growth(value);
    doc["unit"] = r.unit();
    out << doc.dump() << '\n';
  } else if (cfg.format == Format::kCsv) {
    out << io::book_to_csv(book, markets);
  } else {
    out << pad("ticket", 36) << pad("stake", 12) << "price\n";
    for (const auto& [ticket, stake] : io::sorted_by_stake(book)) {
      if (stake < cfg.min_stake) continue;
      out << pad(io::describe_ticket(ticket, markets), 36) << pad(r.stake_text(stake), 12)
          << fixed(ticket_price(ticket, markets), 6) << '\n';
    }
    out << value_name << ' ' << r.growth_text(value) << '\n';
  }
}

int cmd_build_book(const RunConfig& cfg, std::ostream& out) {
  const MarketSet markets = load_markets(cfg);
  const TicketBook book = build_optimal_book(markets);
  render_book(cfg, out, book, markets, "v_par", parlay_growth(markets));
  return kOk;
}

SinglesOptions singles_options(const RunConfig& cfg) {
  SinglesOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.state_cap = cfg.state_cap;
  return o;
}

int cmd_optimize_singles(const RunConfig& cfg, std::ostream& out) {
  const MarketSet markets = load_markets(cfg);
  const auto sol = optimize_singles(markets, singles_options(cfg));
  const Renderer r(cfg);
  if (cfg.format == Format::kJson) {
    json events = json::array();
    for (std::size_t j = 0; j < markets.size(); ++j) {
      events.push_back({{"name", markets[j].name}, {"labels", markets[j].labels}, {"stakes", sol.stakes[j]}});
    }
    out << json{{"events", std::move(events)},
                {"cash", sol.cash},
                {"v_sing", r.growth(sol.objective)},
                {"unit", r.unit()},
                {"kkt_residual", sol.kkt_residual},
                {"iterations", sol.iterations}}
               .dump()
        << '\n';
  } else if (cfg.format == Format::kCsv) {
    out << "event,outcome,stake\n";
    for (std::size_t j = 0; j < markets.size(); ++j) {
      for (std::size_t k = 0; k < markets[j].size(); ++k) {
        out << markets[j].name << ',' << markets[j].labels[k] << ',' << std::setprecision(17) << sol.stakes[j][k]
            << std::defaultfloat << '\n';
      }
    }
  } else {
    for (std::size_t j = 0; j < markets.size(); ++j) {
      out << "event " << markets[j].name << '\n';
      for (std::size_t k = 0; k < markets[j].size(); ++k) {
        out << "  " << pad(markets[j].labels[k], 10) << r.stake_text(sol.stakes[j][k]) << '\n';
      }
    }
    out << "cash " << fixed(sol.cash, 6) << '\n';
    out << "v_sing " << r.growth_text(sol.objective) << '\n';
    out << "iterations " << sol.iterations << ", KKT residual " << std::scientific << std::setprecision(3)
        << sol.kkt_residual << std::defaultfloat << '\n';
  }
  return kOk;
}

int cmd_optimize_tickets(const RunConfig& cfg, std::ostream& out) {
  const MarketSet markets = load_markets(cfg);
  TicketOracleOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.oracle_max_iter;
  o.ticket_cap = cfg.oracle_ticket_cap;
  o.state_cap = cfg.state_cap;
  const auto result = optimize_ticket_space(markets, o);
  render_book(cfg, out, result.book, markets, "objective", result.objective);
  if (cfg.format == Format::kTable) out << "iterations " << result.iterations << '\n';
  return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const MarketSet markets = load_markets(cfg);
  const Renderer r(cfg);
  const auto gap = growth_gap(markets, singles_options(cfg));
  const auto solutions = solve_events(markets);
  const TicketBook book = build_optimal_book(markets, solutions);
  const auto ticket_kkt = verify_ticket_kkt(book, markets, 1e-10, cfg.ticket_cap, cfg.state_cap);
  bool pass = ticket_kkt.pass;
  std::vector<SingleKktReport> singles;
  for (std::size_t j = 0; j < markets.size(); ++j) {
    singles.push_back(verify_single_kkt(markets[j], solutions[j]));
    pass = pass && singles.back().pass;
  }
  if (cfg.format == Format::kJson) {
    json single_json = json::array();
    for (std::size_t j = 0; j < markets.size(); ++j) {
      json item = single_kkt_json(singles[j]);
      item["event"] = markets[j].name;
      single_json.push_back(std::move(item));
    }
    out << json{{"v_par", r.growth(gap.v_par)},
                {"v_sing", r.growth(gap.v_sing)},
                {"gap", r.growth(gap.gap)},
                {"unit", r.unit()},
                {"single_kkt", std::move(single_json)},
                {"ticket_kkt", ticket_kkt_json(ticket_kkt, markets)}}
               .dump()
        << '\n';
  } else if (cfg.format == Format::kCsv) {
    out << "v_par,v_sing,gap\n"
        << std::setprecision(17) << r.growth(gap.v_par) << ',' << r.growth(gap.v_sing) << ',' << r.growth(gap.gap)
        << std::defaultfloat << '\n';
  } else {
    out << "v_par  " << r.growth_text(gap.v_par) << '\n';
    out << "v_sing " << r.growth_text(gap.v_sing) << '\n';
    out << "gap    " << std::scientific << std::setprecision(6) << r.growth(gap.gap) << std::defaultfloat << ' '
        << r.unit() << '\n';
    for (std::size_t j = 0; j < markets.size(); ++j) {
      out << "event " << markets[j].name << '\n';
      table_single_kkt(out, singles[j]);
    }
    table_ticket_kkt(out, ticket_kkt, markets);
  }
  return pass ? kOk : kVerificationFailure;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.book.empty()) throw ValidationError("verify needs --book");
  const MarketSet markets = load_markets(cfg);
  const TicketBook book = io::book_from_json(io::read_json_file(cfg.book), markets);
  const auto ticket_kkt = verify_ticket_kkt(book, markets, 1e-10, cfg.ticket_cap, cfg.state_cap);
  bool pass = ticket_kkt.pass;
  std::vector<SingleKktReport> singles;
  for (std::size_t j = 0; j < markets.size(); ++j) {
    singles.push_back(verify_single_kkt(markets[j], marginal_strategy(book, markets[j], j)));
    pass = pass && singles.back().pass;
  }
  if (cfg.format == Format::kJson) {
    json single_json = json::array();
    for (std::size_t j = 0; j < markets.size(); ++j) {
      json item = single_kkt_json(singles[j]);
      item["event"] = markets[j].name;
      single_json.push_back(std::move(item));
    }
    out << json{{"pass", pass}, {"single_kkt", std::move(single_json)}, {"ticket_kkt", ticket_kkt_json(ticket_kkt, markets)}}
               .dump()
        << '\n';
  } else {
    for (std::size_t j = 0; j < markets.size(); ++j) {
      out << "event " << markets[j].name << " (marginal allocation)\n";
      table_single_kkt(out, singles[j]);
    }
    table_ticket_kkt(out, ticket_kkt, markets);
    out << (pass ? "verification passed" : "verification FAILED") << '\n';
  }
  return pass ? kOk : kVerificationFailure;
}

json fit_json(const OrderFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "eps,event,coord,x_ind,x_sim,delta,predicted_delta,v_par,v_sing,gap,residual,predicted_residual\n";
  out << std::setprecision(17);
  for (const auto& rec : records) {
    for (std::size_t j = 0; j < rec.x_ind.size(); ++j) {
      for (Eigen::Index k = 0; k < rec.x_ind[j].size(); ++k) {
        out << rec.eps << ',' << j + 1 << ',' << k + 1 << ',' << rec.x_ind[j][k] << ',' << rec.x_sim[j][k] << ','
            << rec.delta[j][k] << ',' << rec.predicted_delta[j][k] << ',' << rec.v_par << ',' << rec.v_sing << ','
            << rec.gap << ',' << rec.residual[j][k] << ',' << rec.predicted_residual[j][k] << '\n';
      }
    }
  }
  out << std::defaultfloat;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto family = io::family_from_json(io::read_json_file(cfg.input));
  SweepOptions options;
  options.tol = std::min(cfg.tol, 1e-12);
  const auto result = shrinkage_sweep(family, options);
  const auto coeffs = coefficients(family);
  if (cfg.format == Format::kCsv) {
    sweep_csv(out, result.records);
    return kOk;
  }
  if (cfg.format == Format::kJson) {
    json records = json::array();
    for (const auto& rec : result.records) {
      json xi = json::array(), xs = json::array(), d = json::array(), pd = json::array(), res = json::array(),
           pres = json::array();
      for (std::size_t j = 0; j < rec.x_ind.size(); ++j) {
        xi.push_back(vec_json(rec.x_ind[j]));
        xs.push_back(vec_json(rec.x_sim[j]));
        d.push_back(vec_json(rec.delta[j]));
        pd.push_back(vec_json(rec.predicted_delta[j]));
        res.push_back(vec_json(rec.residual[j]));
        pres.push_back(vec_json(rec.predicted_residual[j]));
      }
      records.push_back({{"eps", rec.eps},        {"x_ind", xi},         {"x_sim", xs},          {"delta", d},
                         {"predicted_delta", pd}, {"residual", res},     {"predicted_residual", pres},
                         {"v_par", rec.v_par},    {"v_sing", rec.v_sing}, {"gap", rec.gap},
                         {"support_ok", rec.support_ok}});
    }
    json ratios = json::array();
    for (const auto& v : result.shrinkage_ratio) ratios.push_back(vec_json(v));
    json doc{{"eps_max", family.eps_max},
             {"lambda", coeffs.lambda},
             {"delta_order", fit_json(result.delta_order)},
             {"gap_order", fit_json(result.gap_order)},
             {"residual_order", fit_json(result.residual_order)},
             {"isolated_ray_error", result.isolated_ray_error},
             {"shrinkage_ratio", std::move(ratios)},
             {"residual_ratio", result.residual_ratio},
             {"sextic_skipped", result.sextic_skipped},
             {"records", std::move(records)}};
    if (result.sextic_order) doc["sextic_order"] = fit_json(*result.sextic_order);
    out << doc.dump() << '\n';
    return kOk;
  }
  out << "eps_max " << fixed(family.eps_max, 6) << ", " << result.valid_records << '/' << result.records.size()
      << " records on the declared support\n";
  for (std::size_t j = 0; j < coeffs.lambda.size(); ++j) {
    out << "  event " << j + 1 << ": Lambda " << fixed(coeffs.lambda[j], 6) << ", shrinkage ratio at smallest eps";
    for (Eigen::Index k = 0; k < result.shrinkage_ratio[j].size(); ++k) out << ' ' << fixed(result.shrinkage_ratio[j][k], 4);
    out << ", residual ratio " << fixed(result.residual_ratio[j], 4) << '\n';
  }
  out << "slope ||x_sim - x_ind||       " << fixed(result.delta_order.slope, 4) << "  (expected 3)\n";
  out << "slope ||F(x_ind)||            " << fixed(result.residual_order.slope, 4) << "  (expected 3)\n";
  out << "slope V_par - V_sing          " << fixed(result.gap_order.slope, 4) << "  (expected 4)\n";
  if (result.sextic_order) {
    out << "slope G(x_sim) - G(x_ind)     " << fixed(result.sextic_order->slope, 4) << "  (expected 6)\n";
  } else {
    out << "slope G(x_sim) - G(x_ind)     skipped (below noise floor)\n";
  }
  out << "max ||x_ind - alpha eps||/eps " << std::scientific << std::setprecision(3) << result.isolated_ray_error
      << std::defaultfloat << '\n';
  return kOk;
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  GeneratorOptions o;
  o.seed = cfg.seed;
  o.events = cfg.events;
  o.outcomes = cfg.outcomes;
  o.min_overround = cfg.min_overround;
  o.max_overround = cfg.max_overround;
  out << io::markets_to_json(generate_markets(o)).dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Log-optimal single-event, parlay and singles-only wagering", "parlay-kelly"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"table", Format::kTable}, {"json", Format::kJson}, {"csv", Format::kCsv}};
  std::string format_name = "table";
  app.add_option("--format", format_name, "Output format: table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  app.add_option("--tol", cfg.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", cfg.max_iter, "Singles solver iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--oracle-max-iter", cfg.oracle_max_iter, "Ticket-space oracle iteration limit")
      ->check(CLI::PositiveNumber);
  app.add_option("--state-cap", cfg.state_cap, "Joint outcome enumeration cap")->check(CLI::PositiveNumber);
  app.add_option("--ticket-cap", cfg.ticket_cap, "Ticket menu cap for verification")->check(CLI::PositiveNumber);
  app.add_option("--oracle-ticket-cap", cfg.oracle_ticket_cap, "Ticket menu cap for the oracle")
      ->check(CLI::PositiveNumber);
  app.add_option("--min-stake", cfg.min_stake, "Table display threshold for stakes")->check(CLI::NonNegativeNumber);
  app.add_flag("--log2", cfg.log2, "Report growth rates in bits");

  auto with_input = [&](CLI::App* sub) {
    sub->add_option("--input,-i", cfg.input, "Input JSON file")->required();
    sub->fallthrough();
    return sub;
  };
  with_input(app.add_subcommand("solve-event", "Closed-form single-event Kelly solution per event"));
  with_input(app.add_subcommand("build-book", "Exact optimal parlay ticket book"));
  with_input(app.add_subcommand("optimize-singles", "Numerical singles-only optimum"));
  with_input(app.add_subcommand("optimize-tickets", "Generic ticket-space optimizer (oracle)"));
  with_input(app.add_subcommand("compare", "Parlay vs singles-only growth and KKT reports"));
  auto* verify = with_input(app.add_subcommand("verify", "KKT check of a ticket book file"));
  verify->add_option("--book,-b", cfg.book, "Book JSON file")->required();
  with_input(app.add_subcommand("sweep", "Low-edge perturbation sweep and order fits"));
  auto* gen = app.add_subcommand("gen", "Write a seeded random market file");
  gen->fallthrough();
  gen->add_option("--seed", cfg.seed, "Random seed");
  gen->add_option("--events", cfg.events, "Number of events")->check(CLI::PositiveNumber);
  gen->add_option("--outcomes", cfg.outcomes, "Outcomes per event")->check(CLI::Range(2, 26 * 26));
  gen->add_option("--min-overround", cfg.min_overround, "Lower overround bound")->check(CLI::PositiveNumber);
  gen->add_option("--max-overround", cfg.max_overround, "Upper overround bound")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationFailure;
  }
  cfg.format = formats.at(format_name);
  for (const auto& name : kCommands) {
    if (app.got_subcommand(name)) cfg.command = name;
  }

  try {
    if (cfg.command == "solve-event") return cmd_solve_event(cfg, out);
    if (cfg.command == "build-book") return cmd_build_book(cfg, out);
    if (cfg.command == "optimize-singles") return cmd_optimize_singles(cfg, out);
    if (cfg.command == "optimize-tickets") return cmd_optimize_tickets(cfg, out);
    if (cfg.command == "compare") return cmd_compare(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out);
    if (cfg.command == "gen") return cmd_gen(cfg, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  err << app.help();
  return kValidationFailure;
}

}  // namespace parlay_kelly::cli
