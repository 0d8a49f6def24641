#include <iostream>

#include "modnls/cli.hpp"

int main(int argc, char** argv) {
  return modnls::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
