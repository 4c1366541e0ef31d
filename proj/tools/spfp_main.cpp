#include <iostream>
#include <string>
#include <vector>

#include "spfp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return spfp::cli::run(args, std::cout, std::cerr);
}
