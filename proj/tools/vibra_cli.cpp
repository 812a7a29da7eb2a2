#include <iostream>

#include "vibra/commands.hpp"
#include "vibra/linalg.hpp"

int main(int argc, char** argv) {
  vibra::linalg::ensure_working_blas(argv);
  return vibra::cli_main(argc, argv, std::cout, std::cerr);
}
