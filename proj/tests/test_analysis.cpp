#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inhand/analysis.hpp"

using namespace inhand;

TEST_CASE("placeholder") { CHECK(true); }
