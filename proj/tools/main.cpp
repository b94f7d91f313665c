#include <iostream>

#include "nilconj/cli.hpp"

int main(int argc, char** argv) {
  return nilconj::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
