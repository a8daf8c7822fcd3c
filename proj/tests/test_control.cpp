#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inhand/control.hpp"

using namespace inhand;

TEST_CASE("placeholder") { CHECK(true); }
