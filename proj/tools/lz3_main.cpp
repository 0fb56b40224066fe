#include <iostream>
#include <string>
#include <vector>

#include "lz3/cli.hpp"

int main(int argc, char** argv) {
  return lz3::run_cli(std::vector<std::string>(argv + 1, argv + argc),
                      std::cout, std::cerr);
}
