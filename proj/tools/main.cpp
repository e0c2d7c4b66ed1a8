#include <iostream>
#include <vector>

#include "hopf/scenario_io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hopf::run_command(args, std::cout, std::cerr);
}
