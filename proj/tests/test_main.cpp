#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "reebcone/numeric.hpp"

int main(int argc, char** argv) {
  reebcone::set_working_precision_bits(128);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
