#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mpsim/interval_set.hpp"
#include "mpsim/sim.hpp"

using namespace mpsim;

TEST_CASE("basic insert and prefix") {
  IntervalSet s;
  CHECK(s.insert(0, 10) == 10);
  CHECK(s.prefix_end() == 10);
  CHECK(s.insert(20, 30) == 10);
  CHECK(s.prefix_end() == 10);  // hole at [10,20)
  CHECK(s.insert(10, 20) == 10);
  CHECK(s.prefix_end() == 30);
  CHECK(s.total() == 30);
}

TEST_CASE("duplicates and overlaps count once") {
  IntervalSet s;
  CHECK(s.insert(5, 15) == 10);
  CHECK(s.insert(5, 15) == 0);
  CHECK(s.insert(0, 20) == 10);
  CHECK(s.total() == 20);
}

TEST_CASE("adjacent runs merge") {
  IntervalSet s;
  s.insert(0, 5);
  s.insert(5, 10);
  CHECK(s.prefix_end() == 10);
  CHECK(s.contains(0, 10));
  CHECK_FALSE(s.contains(0, 11));
}

TEST_CASE("randomized inserts match a per-byte oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    IntervalSet s;
    std::set<uint64_t> oracle;
    for (int i = 0; i < 200; ++i) {
      uint64_t a = static_cast<uint64_t>(rng.uniform_int(0, 300));
      uint64_t b = a + static_cast<uint64_t>(rng.uniform_int(1, 20));
      uint64_t added = s.insert(a, b);
      uint64_t oracle_added = 0;
      for (uint64_t x = a; x < b; ++x) {
        if (oracle.insert(x).second) ++oracle_added;
      }
      CHECK(added == oracle_added);
    }
    CHECK(s.total() == oracle.size());
    uint64_t prefix = 0;
    while (oracle.count(prefix)) ++prefix;
    CHECK(s.prefix_end() == prefix);
  }
}
