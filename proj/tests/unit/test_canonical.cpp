#include "doctest.h"
#include "psim/canonical.hpp"
#include "psim/types.hpp"

using namespace psim;

TEST_SUITE("canonical") {
  TEST_CASE("fnv1a64 known vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
  }

  TEST_CASE("normalize_ws") {
    CHECK(normalize_ws("  a \t b\n\nc  ") == "a b c");
    CHECK(normalize_ws("") == "");
    CHECK(normalize_ws("   ") == "");
  }

  TEST_CASE("canonical dump ignores key order and whitespace runs") {
    json a = {{"b", "x  y"}, {"a", {1, 2}}};
    json b = json::parse(R"({"a":[1,2],"b":" x y "})");
    CHECK(canonical_dump(a) == canonical_dump(b));
    CHECK(canonical_dump(a) == R"({"a":[1,2],"b":"x y"})");
  }

  TEST_CASE("counter rng is a pure function of seed and cursor") {
    CounterRng a(7), b(7, 0);
    for (int i = 0; i < 5; ++i) a.next();
    CounterRng c(7, 5);
    CHECK(a.next() == c.next());
    CHECK(b.next() != CounterRng(8).next());
    for (int i = 0; i < 1000; ++i) {
      double u = b.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("hhmm round trip") {
    CHECK(format_hhmm(0) == "00:00");
    CHECK(format_hhmm(1440) == "24:00");
    CHECK(format_hhmm(9 * 60 + 5) == "09:05");
    CHECK(parse_hhmm("07:30") == 450);
    CHECK(parse_hhmm("24:00") == 1440);
    CHECK_FALSE(parse_hhmm("24:01"));
    CHECK_FALSE(parse_hhmm("7:30x"));
    CHECK_FALSE(parse_hhmm("12:60"));
  }

  TEST_CASE("goal taxonomy") {
    CHECK(kGoalCount == 10);
    for (auto g : all_goals()) CHECK(parse_goal(goal_name(g)) == g);
    CHECK_FALSE(parse_goal("Sleep"));
  }
}
