#include <iostream>
#include <string>
#include <vector>

#include "lorecast/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lorecast::cli::run(args, std::cout, std::cerr, lorecast::cli::process_env());
}
