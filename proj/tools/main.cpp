#include <iostream>
#include <string>
#include <vector>

#include "parlay_kelly/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return parlay_kelly::cli::run(args, std::cout, std::cerr);
}
