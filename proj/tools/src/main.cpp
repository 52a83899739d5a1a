#include <iostream>

#include "floq_cli/cli.hpp"

int main(int argc, char** argv) {
  return floq::cli::run(argc, argv, std::cout, std::cerr);
}
