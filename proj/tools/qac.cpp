#include <iostream>

#include "qac/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qac::run_command(args, std::cout, std::cerr);
}
