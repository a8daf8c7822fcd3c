#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inhand/simulate.hpp"

using namespace inhand;

TEST_CASE("placeholder") { CHECK(true); }
