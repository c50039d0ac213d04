#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace parlay_kelly::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,  // bad flags, malformed input
  kSolverFailure = 2,      // solver, convergence or cap errors
  kVerificationFailure = 3,
};

enum class Format { kTable, kJson, kCsv };

struct RunConfig {
  std::string command;
  std::string input;
  std::string book;  // verify only
  Format format = Format::kTable;
  double tol = 1e-11;
  std::size_t max_iter = 10'000;
  std::size_t oracle_max_iter = 500'000;
  std::size_t state_cap = 100'000;
  std::size_t ticket_cap = 1'000'000;
  std::size_t oracle_ticket_cap = 5'000;
  std::uint64_t seed = 1;
  std::size_t events = 2;
  std::size_t outcomes = 3;
  double min_overround = 1.0;
  double max_overround = 1.1;
  double min_stake = 1e-12;
  bool log2 = false;
};

/// Parses `args` (without the program name), dispatches one command and
/// writes results to `out`, diagnostics to `err`. Returns an ExitCode value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace parlay_kelly::cli
