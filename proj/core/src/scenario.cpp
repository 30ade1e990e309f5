#include "mpsim/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpsim {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* where,
                  const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw SimError(std::string("unknown config key '") + it.key() + "' in " + where);
    }
  }
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw SimError(std::string("config key '") + key + "' must be a number");
  return obj[key].get<double>();
}

}  // namespace

void ScenarioConfig::validate() const {
  if (duration_s <= 0) throw SimError("duration must be > 0");
  if (metrics_bin_s <= 0) throw SimError("metrics_bin must be > 0");
  if (rsus.empty()) throw SimError("at least one RSU is required");
  medium.validate();
  engine.validate();
  cm.validate();
  if (scheduler != "minrtt" && scheduler != "roundrobin") {
    throw SimError("scheduler must be 'minrtt' or 'roundrobin'");
  }
  if (congestion != "lia" && congestion != "uncoupled") {
    throw SimError("congestion must be 'lia' or 'uncoupled'");
  }
  std::set<int> ids;
  for (const auto& rsu : rsus) {
    if (!ids.insert(rsu.rsu_id).second) {
      throw SimError("duplicate rsu_id " + std::to_string(rsu.rsu_id));
    }
    if (rsu.extra_delay_s < 0) {
      throw SimError("rsus[" + std::to_string(rsu.rsu_id) + "].extra_delay must be >= 0");
    }
    if (rsu.prop_delay_s < 0) {
      throw SimError("rsus[" + std::to_string(rsu.rsu_id) + "].prop_delay must be >= 0");
    }
    double prev_end = -1;
    for (const auto& [start, end] : rsu.intervals_s) {
      if (start < 0 || end > duration_s || start >= end) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "rsus[%d] interval [%g, %g) must be ordered and within [0, %g]",
                      rsu.rsu_id, start, end, duration_s);
        throw SimError(buf);
      }
      if (start < prev_end) {
        throw SimError("rsus[" + std::to_string(rsu.rsu_id) + "] intervals must be disjoint and sorted");
      }
      prev_end = end;
    }
  }
}

ScenarioConfig parse_config_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SimError(std::string("config parse error: ") + e.what());
  }
  require_keys(root, "top level",
               {"duration", "seed", "medium", "engine", "cm", "scheduler",
                "congestion", "rsus", "metrics_bin"});

  ScenarioConfig cfg;
  cfg.duration_s = get_num(root, "duration", cfg.duration_s);
  if (root.contains("seed")) cfg.seed = root["seed"].get<uint64_t>();
  cfg.metrics_bin_s = get_num(root, "metrics_bin", cfg.metrics_bin_s);
  if (root.contains("scheduler")) cfg.scheduler = root["scheduler"].get<std::string>();
  if (root.contains("congestion")) cfg.congestion = root["congestion"].get<std::string>();

  if (root.contains("medium")) {
    const json& m = root["medium"];
    require_keys(m, "medium",
                 {"phy_rate", "frame_overhead", "background_occupancy",
                  "wired_delay", "queue_capacity"});
    cfg.medium.phy_rate_bps = get_num(m, "phy_rate", cfg.medium.phy_rate_bps);
    cfg.medium.frame_overhead_bytes =
        static_cast<int>(get_num(m, "frame_overhead", cfg.medium.frame_overhead_bytes));
    cfg.medium.background_occupancy =
        get_num(m, "background_occupancy", cfg.medium.background_occupancy);
    cfg.medium.wired_delay =
        SimTime::from_seconds(get_num(m, "wired_delay", cfg.medium.wired_delay.seconds()));
    cfg.medium.queue_capacity =
        static_cast<int>(get_num(m, "queue_capacity", cfg.medium.queue_capacity));
  }
  if (root.contains("engine")) {
    const json& e = root["engine"];
    require_keys(e, "engine",
                 {"mss", "min_rto", "dupack_threshold", "ack_policy",
                  "initial_cwnd_segments", "initial_ssthresh_segments"});
    cfg.engine.mss = static_cast<int>(get_num(e, "mss", cfg.engine.mss));
    cfg.engine.min_rto =
        SimTime::from_seconds(get_num(e, "min_rto", cfg.engine.min_rto.seconds()));
    cfg.engine.dupack_threshold =
        static_cast<int>(get_num(e, "dupack_threshold", cfg.engine.dupack_threshold));
    cfg.engine.initial_cwnd_segments = static_cast<int>(
        get_num(e, "initial_cwnd_segments", cfg.engine.initial_cwnd_segments));
    cfg.engine.initial_ssthresh_segments = static_cast<int>(
        get_num(e, "initial_ssthresh_segments", cfg.engine.initial_ssthresh_segments));
    if (e.contains("ack_policy") && e["ack_policy"].get<std::string>() != "every_segment") {
      throw SimError("engine.ack_policy: only 'every_segment' is supported");
    }
  }
  if (root.contains("cm")) {
    const json& c = root["cm"];
    require_keys(c, "cm", {"beacon_period", "loss_timeout"});
    cfg.cm.beacon_period =
        SimTime::from_seconds(get_num(c, "beacon_period", cfg.cm.beacon_period.seconds()));
    cfg.cm.loss_timeout =
        SimTime::from_seconds(get_num(c, "loss_timeout", cfg.cm.loss_timeout.seconds()));
  }
  if (root.contains("rsus")) {
    if (!root["rsus"].is_array()) throw SimError("config key 'rsus' must be an array");
    for (const json& r : root["rsus"]) {
      require_keys(r, "rsus[]", {"rsu_id", "intervals", "extra_delay", "prop_delay"});
      RsuConfig rsu;
      if (!r.contains("rsu_id")) throw SimError("rsus[] entry missing 'rsu_id'");
      rsu.rsu_id = r["rsu_id"].get<int>();
      if (!r.contains("intervals") || !r["intervals"].is_array()) {
        throw SimError("rsus[" + std::to_string(rsu.rsu_id) + "] missing 'intervals' array");
      }
      for (const json& iv : r["intervals"]) {
        if (!iv.is_array() || iv.size() != 2) {
          throw SimError("rsus[" + std::to_string(rsu.rsu_id) +
                         "].intervals entries must be [start, end]");
        }
        rsu.intervals_s.emplace_back(iv[0].get<double>(), iv[1].get<double>());
      }
      rsu.extra_delay_s = get_num(r, "extra_delay", 0.0);
      rsu.prop_delay_s = get_num(r, "prop_delay", rsu.prop_delay_s);
      cfg.rsus.push_back(std::move(rsu));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig cfg;
  cfg.duration_s = 140;
  cfg.rsus = {
      RsuConfig{1, {{0, 50}}, 0.0, 0.002},
      RsuConfig{2, {{20, 140}}, 0.0, 0.002},
      RsuConfig{3, {{100, 140}}, 0.0, 0.002},
  };
  if (name == "baseline") {
    return cfg;
  }
  if (name == "delay200") {
    cfg.rsus[1].extra_delay_s = 0.2;
    return cfg;
  }
  throw SimError("unknown builtin scenario '" + name + "' (expected baseline or delay200)");
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  cfg.validate();

  Simulator sim;
  Rng rng(cfg.seed);  // reserved for stochastic extensions; unused by builtins
  (void)rng;
  RadioMedium medium(sim, cfg.medium);
  auto scheduler = make_scheduler(cfg.scheduler);
  CongestionMode mode =
      cfg.congestion == "lia" ? CongestionMode::Lia : CongestionMode::Uncoupled;
  MptcpEngine engine(sim, medium, *scheduler, cfg.engine, mode);
  HandoverCm cm(sim, medium, engine, cfg.cm);
  for (const auto& rsu : cfg.rsus) {
    cm.set_link_params(rsu.rsu_id,
                       HandoverCm::LinkParams{SimTime::from_seconds(rsu.prop_delay_s),
                                              SimTime::from_seconds(rsu.extra_delay_s)});
  }

  RunResult res;

  // --- metrics state ---
  struct BinAcc {
    uint64_t bytes = 0;
    double srtt_sum_ms = 0;
    int srtt_samples = 0;
  };
  std::map<int, BinAcc> bin_acc;
  std::map<int, int> subflow_rsu;
  double prev_busy_s = 0;
  uint64_t prev_payload = 0;

  // --- delivery-gap state (exact, event-level) ---
  std::optional<SimTime> live_since;
  SimTime last_progress;
  double max_gap_s = 0;
  auto gap_ref = [&]() { return std::max(*live_since, last_progress); };

  engine.hooks.on_event = [&](SimTime t, std::string_view ev, int sf,
                              const std::string& detail) {
    res.events.push_back(EventRow{t.seconds(), std::string(ev), sf, detail});
    if (ev == "subflow_add") {
      if (const Subflow* s = engine.subflow(sf)) subflow_rsu[sf] = s->rsu_id;
      if (!live_since) live_since = t;
    } else if (ev == "subflow_remove") {
      if (engine.subflow_count() == 0 && live_since) {
        max_gap_s = std::max(max_gap_s, (t - gap_ref()).seconds());
        live_since.reset();
      }
    }
  };
  cm.on_event = [&](SimTime t, std::string_view ev, int sf, const std::string& detail) {
    res.events.push_back(EventRow{t.seconds(), std::string(ev), sf, detail});
  };
  engine.hooks.on_unique_bytes = [&](SimTime, int sf, uint64_t bytes) {
    bin_acc[sf].bytes += bytes;
  };
  engine.hooks.on_rtt_sample = [&](SimTime, int sf, SimTime srtt) {
    auto& a = bin_acc[sf];
    a.srtt_sum_ms += srtt.millis();
    a.srtt_samples += 1;
  };
  engine.hooks.on_progress = [&](SimTime t, uint64_t) {
    if (live_since) {
      max_gap_s = std::max(max_gap_s, (t - gap_ref()).seconds());
    }
    last_progress = t;
  };
  if (opt.record_decisions) {
    engine.hooks.on_decision = [&](SimTime t, const std::vector<SubflowCandidate>& cands,
                                   int needed, std::optional<int> chosen) {
      res.decisions.push_back(DecisionRecord{t, cands, needed, chosen});
    };
  }

  const SimTime duration = SimTime::from_seconds(cfg.duration_s);

  // --- metrics ticks (scheduled before beacons so a bin closing at T does
  // not see subflows born at exactly T) ---
  const SimTime bin = SimTime::from_seconds(cfg.metrics_bin_s);
  auto close_bin = [&](SimTime bin_start, SimTime bin_end) {
    double bin_len_s = (bin_end - bin_start).seconds();
    // Rows for every subflow that is live or saw traffic this bin.
    for (int id : engine.live_subflow_ids()) bin_acc.try_emplace(id);
    for (auto& [id, acc] : bin_acc) {
      MetricsRow row;
      row.bin_start_s = bin_start.seconds();
      row.subflow_id = id;
      auto rit = subflow_rsu.find(id);
      row.rsu_id = rit == subflow_rsu.end() ? 0 : rit->second;
      row.bytes = acc.bytes;
      row.bitrate_mbps = static_cast<double>(acc.bytes) * 8.0 / (bin_len_s * 1e6);
      const Subflow* sf = engine.subflow(id);
      if (acc.srtt_samples > 0) {
        row.srtt_ms = acc.srtt_sum_ms / acc.srtt_samples;
      } else if (sf) {
        row.srtt_ms = sf->srtt_estimate().millis();
      }
      row.cwnd_bytes = sf ? static_cast<uint64_t>(sf->cwnd) : 0;
      res.metrics.push_back(row);
    }
    bin_acc.clear();
    res.channel.push_back(ChannelBin{bin_start.seconds(),
                                     medium.busy_airtime_seconds() - prev_busy_s,
                                     medium.delivered_payload_total() - prev_payload});
    prev_busy_s = medium.busy_airtime_seconds();
    prev_payload = medium.delivered_payload_total();
  };
  for (SimTime start{}, end = std::min(bin, duration);;
       start = end, end = std::min(end + bin, duration)) {
    sim.schedule(end, "metrics_tick", [&close_bin, start, end] { close_bin(start, end); });
    if (end == duration) break;
  }

  // --- beacons ---
  for (const auto& rsu : cfg.rsus) {
    for (const auto& [start_s, end_s] : rsu.intervals_s) {
      SimTime t = SimTime::from_seconds(start_s);
      const SimTime end = SimTime::from_seconds(end_s);
      for (; t < end; t += cfg.cm.beacon_period) {
        int rsu_id = rsu.rsu_id;
        sim.schedule(t, "beacon", [&cm, rsu_id, t] {
          cm.on_beacon(Beacon{rsu_id, t});
        });
      }
    }
  }

  sim.run_until(duration);

  if (live_since) {
    max_gap_s = std::max(max_gap_s, (duration - gap_ref()).seconds());
  }

  res.sink_unique_bytes = engine.receiver().unique_bytes();
  res.sink_delivered_prefix = engine.receiver().data_ack();
  res.retransmit_count = engine.total_retransmits();
  res.summary = summarize(res.metrics, res.events, cfg.duration_s, cfg.metrics_bin_s);
  res.summary.max_delivery_gap_s = max_gap_s;
  return res;
}

RunSummary summarize(const std::vector<MetricsRow>& metrics,
                     const std::vector<EventRow>& events, double duration_s,
                     double bin_s) {
  RunSummary out;
  if (metrics.empty()) return out;

  constexpr double kRampS = 2.0;  // phase means exclude the post-change ramp

  std::set<double> boundaries{0.0, duration_s};
  int adds = 0, removes = 0;
  for (const auto& e : events) {
    if (e.event == "subflow_add") {
      boundaries.insert(e.time_s);
      ++adds;
    } else if (e.event == "subflow_remove") {
      boundaries.insert(e.time_s);
      ++removes;
    }
  }
  out.handover_count = std::max(0, adds - 1) + removes;

  for (const auto& row : metrics) out.total_bytes += row.bytes;

  std::vector<double> bounds(boundaries.begin(), boundaries.end());
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    double start = bounds[i], end = bounds[i + 1];
    std::map<int, std::pair<double, int>> per_subflow;  // sum, n
    double total_sum = 0;
    int total_bins = 0;
    std::map<double, double> bin_totals;
    for (const auto& row : metrics) {
      if (row.bin_start_s < start + kRampS || row.bin_start_s + bin_s > end) continue;
      auto& [sum, n] = per_subflow[row.subflow_id];
      sum += row.bitrate_mbps;
      n += 1;
      bin_totals[row.bin_start_s] += row.bitrate_mbps;
    }
    if (bin_totals.empty()) continue;  // zero-length or all-ramp phase
    PhaseStats ps;
    ps.start_s = start;
    ps.end_s = end;
    for (const auto& [id, sn] : per_subflow) {
      ps.mean_bitrate_mbps[id] = sn.first / sn.second;
    }
    for (const auto& [t, v] : bin_totals) {
      total_sum += v;
      ++total_bins;
    }
    ps.mean_total_mbps = total_sum / total_bins;
    out.phases.push_back(std::move(ps));
  }

  // Bin-granularity delivery gap: longest run of zero-byte bins that start
  // while at least one subflow is live. run_scenario overrides this with
  // the exact event-level value.
  std::map<double, uint64_t> bin_bytes;
  for (const auto& row : metrics) bin_bytes[row.bin_start_s] += row.bytes;
  std::vector<std::pair<double, int>> live_changes;  // time -> delta
  for (const auto& e : events) {
    if (e.event == "subflow_add") live_changes.emplace_back(e.time_s, +1);
    if (e.event == "subflow_remove") live_changes.emplace_back(e.time_s, -1);
  }
  std::sort(live_changes.begin(), live_changes.end());
  double gap = 0, max_gap = 0;
  for (double t = 0; t + bin_s <= duration_s + 1e-9; t += bin_s) {
    int live = 0;
    for (const auto& [ct, d] : live_changes) {
      if (ct <= t + 1e-9) live += d;
    }
    uint64_t b = 0;
    for (const auto& [bt, bb] : bin_bytes) {
      if (std::abs(bt - t) < bin_s / 2) { b = bb; break; }
    }
    if (live > 0 && b == 0) {
      gap += bin_s;
      max_gap = std::max(max_gap, gap);
    } else {
      gap = 0;
    }
  }
  out.max_delivery_gap_s = max_gap;
  return out;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "bin_start_s,subflow_id,rsu_id,bytes,bitrate_mbps,srtt_ms,cwnd_bytes\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.3f,%d,%d,%" PRIu64 ",%.6f,%.3f,%" PRIu64 "\n",
                  r.bin_start_s, r.subflow_id, r.rsu_id, r.bytes, r.bitrate_mbps,
                  r.srtt_ms, r.cwnd_bytes);
    out += buf;
  }
  return out;
}

std::string events_to_csv(const std::vector<EventRow>& rows) {
  std::string out = "time_s,event,subflow_id,detail\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%s,%d,%s\n", r.time_s, r.event.c_str(),
                  r.subflow_id, r.detail.c_str());
    out += buf;
  }
  return out;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    if (std::sscanf(line.c_str(), "%lf,%d,%d,%" SCNu64 ",%lf,%lf,%" SCNu64,
                    &r.bin_start_s, &r.subflow_id, &r.rsu_id, &r.bytes,
                    &r.bitrate_mbps, &r.srtt_ms, &r.cwnd_bytes) != 7) {
      throw SimError("malformed metrics row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<EventRow> read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open " + path);
  std::vector<EventRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    EventRow r;
    std::string t, sf;
    if (!std::getline(ss, t, ',') || !std::getline(ss, r.event, ',') ||
        !std::getline(ss, sf, ',')) {
      throw SimError("malformed events row: " + line);
    }
    std::getline(ss, r.detail);
    r.time_s = std::stod(t);
    r.subflow_id = std::stoi(sf);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["total_bytes"] = s.total_bytes;
  j["handover_count"] = s.handover_count;
  j["max_delivery_gap_s"] = s.max_delivery_gap_s;
  j["phases"] = json::array();
  for (const auto& p : s.phases) {
    json jp;
    jp["start_s"] = p.start_s;
    jp["end_s"] = p.end_s;
    jp["mean_total_mbps"] = p.mean_total_mbps;
    jp["mean_bitrate_mbps"] = json::object();
    for (const auto& [id, v] : p.mean_bitrate_mbps) {
      jp["mean_bitrate_mbps"][std::to_string(id)] = v;
    }
    j["phases"].push_back(std::move(jp));
  }
  return j.dump(2) + "\n";
}

void write_run_outputs(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(out_dir + "/" + name, std::ios::binary);
    if (!out) throw SimError("cannot write " + out_dir + "/" + name);
    out << content;
  };
  write("metrics.csv", metrics_to_csv(result.metrics));
  write("events.csv", events_to_csv(result.events));
  write("summary.json", summary_to_json(result.summary));
}

}  // namespace mpsim
