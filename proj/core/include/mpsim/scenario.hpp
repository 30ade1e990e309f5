#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpsim/handover.hpp"
#include "mpsim/mptcp.hpp"

namespace mpsim {

struct RsuConfig {
  int rsu_id = 0;
  std::vector<std::pair<double, double>> intervals_s;  // in-range windows [start, end)
  double extra_delay_s = 0;
  double prop_delay_s = 0.002;
};

// Declarative experiment description. All durations/delays are seconds in
// the JSON form; see configs/ for examples.
struct ScenarioConfig {
  double duration_s = 140;
  uint64_t seed = 1;
  MediumConfig medium;
  EngineParams engine;
  CmParams cm;
  std::string scheduler = "minrtt";
  std::string congestion = "lia";  // or "uncoupled"
  std::vector<RsuConfig> rsus;
  double metrics_bin_s = 1.0;

  void validate() const;
};

ScenarioConfig parse_config_json(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// "baseline": RSU1 [0,50), RSU2 [20,140), RSU3 [100,140), no extra delay.
// "delay200": baseline with 200 ms extra one-way delay on RSU2's link.
ScenarioConfig builtin_scenario(const std::string& name);

struct MetricsRow {
  double bin_start_s = 0;
  int subflow_id = 0;
  int rsu_id = 0;
  uint64_t bytes = 0;         // first-time bytes carried by this subflow in the bin
  double bitrate_mbps = 0;
  double srtt_ms = 0;         // mean over the bin's samples
  uint64_t cwnd_bytes = 0;    // end of bin
};

struct EventRow {
  double time_s = 0;
  std::string event;  // subflow_add|subflow_remove|link_up|link_down|retransmit|reinjection
  int subflow_id = 0;
  std::string detail;
};

struct ChannelBin {
  double bin_start_s = 0;
  double busy_airtime_s = 0;
  uint64_t payload_bytes = 0;
};

struct PhaseStats {
  double start_s = 0;
  double end_s = 0;
  std::map<int, double> mean_bitrate_mbps;  // per subflow
  double mean_total_mbps = 0;
};

struct RunSummary {
  std::vector<PhaseStats> phases;
  uint64_t total_bytes = 0;
  int handover_count = 0;
  double max_delivery_gap_s = 0;  // zero-delivery stretch while >= 1 subflow live
};

struct DecisionRecord {
  SimTime at;
  std::vector<SubflowCandidate> candidates;
  int needed_bytes = 0;
  std::optional<int> chosen;
};

struct RunResult {
  std::vector<MetricsRow> metrics;
  std::vector<EventRow> events;
  std::vector<ChannelBin> channel;
  RunSummary summary;
  std::vector<DecisionRecord> decisions;  // only when requested
  uint64_t sink_unique_bytes = 0;
  uint64_t sink_delivered_prefix = 0;
  uint64_t retransmit_count = 0;
};

struct RunOptions {
  bool record_decisions = false;
};

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

// Phase boundaries are the subflow add/remove times; means skip the first
// 2 s of each phase (ramp) and use bins fully inside the phase.
RunSummary summarize(const std::vector<MetricsRow>& metrics,
                     const std::vector<EventRow>& events, double duration_s,
                     double bin_s = 1.0);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
std::string events_to_csv(const std::vector<EventRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);
std::vector<EventRow> read_events_csv(const std::string& path);
std::string summary_to_json(const RunSummary& s);

// Writes metrics.csv, events.csv and summary.json into out_dir.
void write_run_outputs(const RunResult& result, const std::string& out_dir);

}  // namespace mpsim
