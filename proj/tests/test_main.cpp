#include <gtest/gtest.h>

#include "vibra/linalg.hpp"

int main(int argc, char** argv) {
  vibra::linalg::ensure_working_blas(argv);
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
