#include <iostream>
#include <string>
#include <vector>

#include "qvolterra/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qvolterra::run_cli(args, std::cout, std::cerr);
}
