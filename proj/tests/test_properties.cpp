#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "properties.hpp"

TEST_CASE("invariant suites") {
  for (const auto& s : cennq::props::all_suites(1000, 2024)) {
    INFO(s.name << ": " << s.first_failure);
    CHECK(s.cases >= 1000);
    CHECK(s.failures == 0);
  }
}
