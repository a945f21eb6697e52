#include <iostream>
#include <string>
#include <vector>

#include "monocheck/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return monocheck::cli::run(args, std::cout, std::cerr);
}
