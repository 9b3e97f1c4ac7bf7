#include <iostream>
#include <string>
#include <vector>

#include "vecset/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return vecset::cli::run(args, std::cout, std::cerr);
}
