#include <iostream>

#include "hpds/cli.hpp"

int main(int argc, char** argv) {
  return hpds::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
