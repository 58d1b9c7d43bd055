#include "doctest.h"
#include "properties.hpp"

using namespace sdt;

TEST_SUITE("properties") {
  TEST_CASE("partition safety, conservation and post-STRP audit over random scenarios") {
    const auto o = props::safety_and_conservation(100);
    CHECK(o.scenarios >= 100);
    for (const auto& f : o.failures) FAIL_CHECK(f);
  }

  TEST_CASE("determinism: identical reports per seed") {
    const auto o = props::determinism(100);
    CHECK(o.scenarios >= 100);
    for (const auto& f : o.failures) FAIL_CHECK(f);
  }

  TEST_CASE("latency composition on random dependency chains") {
    const auto o = props::latency_composition(100);
    CHECK(o.scenarios >= 100);
    for (const auto& f : o.failures) FAIL_CHECK(f);
  }
}
