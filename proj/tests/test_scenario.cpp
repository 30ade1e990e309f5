#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "mpsim/scenario.hpp"

using namespace mpsim;

namespace {

ScenarioConfig short_single_rsu(double duration = 5.0) {
  ScenarioConfig cfg;
  cfg.duration_s = duration;
  cfg.rsus = {RsuConfig{1, {{0.0, duration}}, 0.0, 0.002}};
  return cfg;
}

}  // namespace

TEST_CASE("config parsing applies defaults and overrides") {
  ScenarioConfig cfg = parse_config_json(R"({
    "duration": 30,
    "seed": 7,
    "rsus": [{"rsu_id": 1, "intervals": [[0, 30]]}]
  })");
  CHECK(cfg.duration_s == 30);
  CHECK(cfg.seed == 7);
  CHECK(cfg.scheduler == "minrtt");
  CHECK(cfg.congestion == "lia");
  CHECK(cfg.medium.phy_rate_bps == doctest::Approx(9e6));
  CHECK(cfg.engine.mss == 1400);
  CHECK(cfg.cm.loss_timeout == SimTime::from_seconds(3));
  REQUIRE(cfg.rsus.size() == 1);
  CHECK(cfg.rsus[0].extra_delay_s == 0);
  CHECK(cfg.rsus[0].prop_delay_s == doctest::Approx(0.002));

  ScenarioConfig full = parse_config_json(R"({
    "duration": 10,
    "medium": {"phy_rate": 6e6, "background_occupancy": 0.25},
    "engine": {"mss": 1200, "initial_cwnd_segments": 4},
    "cm": {"beacon_period": 0.5, "loss_timeout": 2.0},
    "scheduler": "roundrobin",
    "congestion": "uncoupled",
    "rsus": [{"rsu_id": 2, "intervals": [[1, 9]], "extra_delay": 0.2}]
  })");
  CHECK(full.medium.phy_rate_bps == doctest::Approx(6e6));
  CHECK(full.medium.background_occupancy == doctest::Approx(0.25));
  CHECK(full.engine.mss == 1200);
  CHECK(full.engine.initial_cwnd_segments == 4);
  CHECK(full.cm.beacon_period == SimTime::from_ms(500));
  CHECK(full.scheduler == "roundrobin");
  CHECK(full.rsus[0].extra_delay_s == doctest::Approx(0.2));
}

TEST_CASE("config errors are specific") {
  // unknown key is named in the error
  try {
    parse_config_json(R"({"duration": 10, "phyrate": 1, "rsus": []})");
    FAIL("expected SimError");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("phyrate") != std::string::npos);
  }
  // interval past the end of the run
  CHECK_THROWS_AS(parse_config_json(R"({
    "duration": 10,
    "rsus": [{"rsu_id": 1, "intervals": [[0, 20]]}]
  })").validate(), SimError);
  CHECK_THROWS_AS(parse_config_json("not json"), SimError);
}

TEST_CASE("builtin scenarios match their documented schedules") {
  ScenarioConfig base = builtin_scenario("baseline");
  CHECK(base.duration_s == 140);
  REQUIRE(base.rsus.size() == 3);
  CHECK(base.rsus[0].intervals_s == std::vector<std::pair<double, double>>{{0, 50}});
  CHECK(base.rsus[1].intervals_s == std::vector<std::pair<double, double>>{{20, 140}});
  CHECK(base.rsus[2].intervals_s == std::vector<std::pair<double, double>>{{100, 140}});
  for (const auto& r : base.rsus) CHECK(r.extra_delay_s == 0);

  ScenarioConfig delayed = builtin_scenario("delay200");
  REQUIRE(delayed.rsus.size() == 3);
  CHECK(delayed.rsus[0].extra_delay_s == 0);
  CHECK(delayed.rsus[1].extra_delay_s == doctest::Approx(0.2));
  CHECK(delayed.rsus[2].extra_delay_s == 0);

  CHECK_THROWS_AS(builtin_scenario("nope"), SimError);
}

TEST_CASE("short single-RSU run moves real traffic") {
  RunResult r = run_scenario(short_single_rsu());
  double mbps = r.sink_unique_bytes * 8.0 / 5.0 / 1e6;
  CHECK(mbps > 1.0);
  CHECK(r.summary.handover_count == 0);
}

TEST_CASE("metrics bins are contiguous, exhaustive and conservative") {
  ScenarioConfig cfg = builtin_scenario("baseline");
  cfg.duration_s = 30;  // covers the 2-RSU join at t=20
  cfg.rsus[1].intervals_s = {{20, 30}};
  cfg.rsus[2].intervals_s.clear();
  cfg.rsus[0].intervals_s = {{0, 30}};
  RunResult r = run_scenario(cfg);

  // every bin start appears, aggregate over subflows is one row per subflow
  std::set<double> starts;
  uint64_t total = 0;
  std::map<double, uint64_t> per_bin_bytes;
  for (const auto& m : r.metrics) {
    starts.insert(m.bin_start_s);
    total += m.bytes;
    per_bin_bytes[m.bin_start_s] += m.bytes;
    CHECK(m.bitrate_mbps == doctest::Approx(m.bytes * 8.0 / 1e6).epsilon(1e-9));
  }
  for (int b = 0; b < 30; ++b) CHECK(starts.count(static_cast<double>(b)) == 1);
  CHECK(starts.size() == 30);

  // conservation: binned bytes equal the sink's unique byte count
  CHECK(total == r.sink_unique_bytes);

  // per-bin aggregate can never exceed the channel rate
  for (const auto& [bin, bytes] : per_bin_bytes) {
    CHECK(bytes * 8.0 <= 9e6 * 1.0001);
  }
  // channel accounting exists for every bin and respects the half-duplex cap
  CHECK(r.channel.size() == 30);
  for (const auto& cb : r.channel) {
    CHECK(cb.busy_airtime_s <= 1.0 + 0.003);  // one frame may straddle the edge
  }
}

TEST_CASE("events carry the expected lifecycle") {
  ScenarioConfig cfg = builtin_scenario("baseline");
  cfg.duration_s = 60;
  cfg.rsus[1].intervals_s = {{20, 60}};
  cfg.rsus[2].intervals_s.clear();
  RunResult r = run_scenario(cfg);

  std::map<std::string, int> counts;
  for (const auto& e : r.events) counts[e.event]++;
  CHECK(counts["link_up"] == 2);        // RSU1 at 0, RSU2 at 20
  CHECK(counts["subflow_add"] == 2);
  CHECK(counts["link_down"] == 1);      // RSU1 leaves at 50 (+3 s timeout)
  CHECK(counts["subflow_remove"] == 1);
  CHECK(counts["reinjection"] >= 1);    // unacked data moved to subflow 2
  CHECK(r.summary.handover_count == 2);

  // ordering: remove precedes link_down for the same departure
  double t_remove = -1, t_down = -1;
  for (const auto& e : r.events) {
    if (e.event == "subflow_remove") t_remove = e.time_s;
    if (e.event == "link_down") t_down = e.time_s;
  }
  CHECK(t_remove <= t_down);
  CHECK(t_remove == doctest::Approx(52.0).epsilon(0.05));  // last beacon 49 + 3
}

TEST_CASE("identical configs and seeds give byte-identical outputs") {
  ScenarioConfig cfg = short_single_rsu(8.0);
  cfg.seed = 42;
  RunResult a = run_scenario(cfg);
  RunResult b = run_scenario(cfg);
  CHECK(metrics_to_csv(a.metrics) == metrics_to_csv(b.metrics));
  CHECK(events_to_csv(a.events) == events_to_csv(b.events));
  CHECK(summary_to_json(a.summary) == summary_to_json(b.summary));
}

TEST_CASE("alternative scheduler and congestion modes run") {
  ScenarioConfig cfg = short_single_rsu();
  cfg.rsus.push_back(RsuConfig{2, {{0.0, 5.0}}, 0.0, 0.002});

  cfg.scheduler = "roundrobin";
  RunResult rr = run_scenario(cfg);
  CHECK(rr.sink_unique_bytes > 0);

  cfg.scheduler = "minrtt";
  cfg.congestion = "uncoupled";
  RunResult unc = run_scenario(cfg);
  CHECK(unc.sink_unique_bytes > 0);
}

TEST_CASE("CSV round trip preserves rows") {
  RunResult r = run_scenario(short_single_rsu());
  write_run_outputs(r, "scenario_rt_out");
  auto metrics = read_metrics_csv("scenario_rt_out/metrics.csv");
  auto events = read_events_csv("scenario_rt_out/events.csv");
  REQUIRE(metrics.size() == r.metrics.size());
  REQUIRE(events.size() == r.events.size());
  CHECK(metrics_to_csv(metrics) == metrics_to_csv(r.metrics));
  CHECK(events_to_csv(events) == events_to_csv(r.events));
}

TEST_CASE("summary phases follow subflow membership changes") {
  ScenarioConfig cfg = builtin_scenario("baseline");
  RunResult r = run_scenario(cfg);
  REQUIRE(r.summary.phases.size() >= 4);
  // phase 1: single subflow; phase 2: two subflows
  CHECK(r.summary.phases[0].mean_bitrate_mbps.size() == 1);
  CHECK(r.summary.phases[1].mean_bitrate_mbps.size() == 2);
  CHECK(r.summary.handover_count == 3);
  CHECK(r.summary.max_delivery_gap_s < 2.0);
  CHECK(r.summary.total_bytes == r.sink_unique_bytes);
}
