#include <iostream>
#include <string>
#include <vector>

#include "ntrocr/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ntrocr::run_cli(args, std::cout, std::cerr);
}
