#include <iostream>
#include <string>
#include <vector>

#include "docsimp_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return docsimp::cli::run_cli(args, {std::cout, std::cerr});
}
