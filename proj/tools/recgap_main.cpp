#include <iostream>
#include <string>
#include <vector>

#include "recgap/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return recgap::cli_dispatch(args, std::cout, std::cerr);
}
