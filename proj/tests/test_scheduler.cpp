#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "mpsim/scheduler.hpp"
#include "mpsim/sim.hpp"

using namespace mpsim;

namespace {
SubflowCandidate cand(int id, int srtt_ms, int space) {
  return SubflowCandidate{id, SimTime::from_ms(srtt_ms), space};
}
}  // namespace

TEST_CASE("minRTT picks the lowest-RTT subflow with window space") {
  MinRttScheduler s;
  CHECK(s.select({cand(1, 20, 1400), cand(2, 420, 1400)}, 1400) == 1);
}

TEST_CASE("minRTT falls through to the next RTT when the window is full") {
  MinRttScheduler s;
  CHECK(s.select({cand(1, 20, 0), cand(2, 420, 1400)}, 1400) == 2);
}

TEST_CASE("minRTT ties break to the lowest subflow id") {
  MinRttScheduler s;
  CHECK(s.select({cand(2, 20, 1400), cand(1, 20, 1400)}, 1400) == 1);
}

TEST_CASE("minRTT returns nothing when every window is full") {
  MinRttScheduler s;
  CHECK_FALSE(s.select({cand(1, 20, 1000), cand(2, 30, 0)}, 1400).has_value());
  CHECK_FALSE(s.select({}, 1400).has_value());
}

TEST_CASE("minRTT dominance holds on randomized candidate sets") {
  MinRttScheduler s;
  Rng rng(31337);
  for (int i = 0; i < 2000; ++i) {
    std::vector<SubflowCandidate> cands;
    int n = static_cast<int>(rng.uniform_int(0, 6));
    for (int k = 0; k < n; ++k) {
      cands.push_back(cand(k + 1, static_cast<int>(rng.uniform_int(1, 500)),
                           static_cast<int>(rng.uniform_int(0, 3000))));
    }
    auto pick = s.select(cands, 1400);
    bool any_space = false;
    for (const auto& c : cands) any_space = any_space || c.cwnd_space >= 1400;
    CHECK(pick.has_value() == any_space);
    if (!pick) continue;
    const SubflowCandidate* chosen = nullptr;
    for (const auto& c : cands) {
      if (c.subflow_id == *pick) chosen = &c;
    }
    REQUIRE(chosen != nullptr);
    CHECK(chosen->cwnd_space >= 1400);  // never a full window
    for (const auto& c : cands) {
      if (c.cwnd_space >= 1400) CHECK(chosen->srtt <= c.srtt);
    }
  }
}

TEST_CASE("round robin cycles over subflows with space") {
  RoundRobinScheduler s;
  std::vector<SubflowCandidate> cands{cand(1, 20, 1400), cand(2, 20, 1400),
                                      cand(3, 20, 1400)};
  CHECK(s.select(cands, 1400) == 1);
  CHECK(s.select(cands, 1400) == 2);
  CHECK(s.select(cands, 1400) == 3);
  CHECK(s.select(cands, 1400) == 1);
  cands[1].cwnd_space = 0;  // 2 drops out
  CHECK(s.select(cands, 1400) == 3);
  CHECK(s.select(cands, 1400) == 1);
  CHECK_FALSE(s.select({cand(1, 20, 100)}, 1400).has_value());
}

TEST_CASE("factory maps config names") {
  CHECK(make_scheduler("minrtt")->name() == "minrtt");
  CHECK(make_scheduler("roundrobin")->name() == "roundrobin");
  CHECK_THROWS_AS(make_scheduler("blest"), SimError);
}
