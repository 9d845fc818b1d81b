#include <iostream>
#include <string>
#include <vector>

#include "prm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return prm::cli::run(args, std::cout, std::cerr);
}
